//! The command-line contract: one JSON line on stdout, exit codes, output
//! files and determinism.

use std::fs;
use std::path::Path;
use std::process::Command;

use cadfit::geometry::write_stl;
use cadfit::program::{deserialize_program, Role};
use cadfit::{load_mesh, TriMesh, Vec3};
use serde_json::Value;

fn cadfit(args: &[&str]) -> (Value, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_cadfit"))
        .args(args)
        .output()
        .expect("binary runs");
    let stdout = String::from_utf8(out.stdout).expect("utf-8 stdout");
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 1, "expected one line, got {stdout:?}");
    let v: Value = serde_json::from_str(lines[0]).expect("stdout is JSON");
    (v, out.status.code().expect("exit code"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn cube_stl(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("cube.stl");
    write_stl(&TriMesh::cuboid(Vec3::new(1.0, 2.0, 3.0), Vec3::new(3.0, 4.0, 5.0)), &path).unwrap();
    path
}

#[test]
fn reconstruct_cube() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = cube_stl(dir.path());
    let out = dir.path().join("out");
    let (v, code) = cadfit(&["reconstruct", p(&mesh), "--out", p(&out), "--seed", "3", "--threads", "1"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["ok"], true);
    assert!(v["iou"].as_f64().unwrap() >= 0.98);
    assert_eq!(v["invalid"], false);
    for f in ["program.json", "program.py", "reconstruction.stl", "report.json", "manifest.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report["iou"].as_f64().unwrap() >= 0.98);
    assert_eq!(report["seed"], 3);
    assert!(report.get("wall_time").is_none());
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["wall_time_s"].as_f64().is_some());

    // the program lives in the input frame
    let program = deserialize_program(&fs::read_to_string(out.join("program.json")).unwrap()).unwrap();
    let b = cadfit::Solid::new(program).unwrap().bounds();
    assert!((b.center() - Vec3::new(2.0, 3.0, 4.0)).norm() < 0.1, "{b:?}");
}

#[test]
fn reconstruct_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = cube_stl(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let (_, code) = cadfit(&["reconstruct", p(&mesh), "--out", p(&out), "--seed", "7"]);
        assert_eq!(code, 0);
        (
            fs::read(out.join("program.json")).unwrap(),
            fs::read(out.join("report.json")).unwrap(),
        )
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn open_mesh_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let mut mesh = TriMesh::cuboid(Vec3::zeros(), Vec3::repeat(1.0));
    mesh.faces.pop();
    let path = dir.path().join("open.stl");
    write_stl(&mesh, &path).unwrap();
    let (v, code) = cadfit(&["reconstruct", p(&path), "--out", p(&dir.path().join("out"))]);
    assert_eq!(code, 2);
    assert_eq!(v["ok"], false);
    assert_eq!(v["error"]["kind"], "not_watertight");
}

#[test]
fn missing_and_malformed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let (v, code) = cadfit(&["reconstruct", p(&dir.path().join("nope.stl"))]);
    assert_eq!((code, v["error"]["kind"].as_str()), (2, Some("io")));

    let junk = dir.path().join("junk.stl");
    fs::write(&junk, [0u8; 40]).unwrap();
    let (v, code) = cadfit(&["reconstruct", p(&junk)]);
    assert_eq!((code, v["error"]["kind"].as_str()), (2, Some("malformed_stl")));
}

#[test]
fn bad_config_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = cube_stl(dir.path());
    let out = dir.path().join("out");
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"iou_resolution": 0}"#).unwrap();
    let (v, code) = cadfit(&["reconstruct", p(&mesh), "--config", p(&bad), "--out", p(&out)]);
    assert_eq!((code, v["error"]["kind"].as_str()), (3, Some("config")));

    fs::write(&bad, "{not json").unwrap();
    assert_eq!(cadfit(&["reconstruct", p(&mesh), "--config", p(&bad), "--out", p(&out)]).1, 3);
    let missing = dir.path().join("missing.json");
    assert_eq!(cadfit(&["reconstruct", p(&mesh), "--config", p(&missing), "--out", p(&out)]).1, 3);
}

#[test]
fn eval_contract() {
    let dir = tempfile::tempdir().unwrap();
    let bench = dir.path().join("bench");
    let (_, code) = cadfit(&["gen", "--n", "1", "--complexity", "medium", "--seed", "2", "--out", p(&bench)]);
    assert_eq!(code, 0);
    let gt = bench.join("medium_000.stl");
    let program = bench.join("medium_000.json");

    let (v, code) = cadfit(&["eval", "--pred", p(&program), "--gt", p(&gt)]);
    assert_eq!(code, 0);
    assert!(v["iou"].as_f64().unwrap() >= 0.98, "{v}");
    assert!(v["cd"].as_f64().unwrap() < 1e-2, "{v}");
    assert_eq!(v["invalid"], false);
    assert_eq!(v["samples"], 8192);
    for k in ["a", "b", "E", "align"] {
        assert!(v.get(k).is_some(), "missing {k}");
    }

    let (v, _) = cadfit(&["eval", "--pred", p(&gt), "--gt", p(&gt), "--no-align"]);
    assert_eq!(v["iou"], 1.0);
    assert_eq!(v["cd"], 0.0);
    assert!(v["align"].is_null());

    // a shifted copy matches after alignment
    let base = cadfit(&["eval", "--pred", p(&gt), "--gt", p(&gt)]).0;
    let shifted = dir.path().join("shifted.stl");
    let mesh = load_mesh(&gt).unwrap();
    write_stl(&mesh.transformed(1.0, &Vec3::new(0.1, 0.0, 0.0)), &shifted).unwrap();
    let (v, _) = cadfit(&["eval", "--pred", p(&shifted), "--gt", p(&gt)]);
    for k in ["iou", "cd", "a", "b"] {
        let (x, y) = (v[k].as_f64().unwrap(), base[k].as_f64().unwrap());
        assert!((x - y).abs() <= 1e-2, "{k}: {x} vs {y}");
    }
    let (v, _) = cadfit(&["eval", "--pred", p(&shifted), "--gt", p(&gt), "--no-align"]);
    assert!(v["iou"].as_f64().unwrap() < 0.95);

    let broken = dir.path().join("broken.json");
    fs::write(&broken, r#"{"version": 1, "ops": [{"kind": "extrude""#).unwrap();
    let (v, code) = cadfit(&["eval", "--pred", p(&broken), "--gt", p(&gt)]);
    assert_eq!(code, 0);
    assert_eq!(v["invalid"], true);
    assert_eq!(v["iou"], 0.0);
    assert_eq!(v["cd"], "inf");
}

#[test]
fn gen_contract() {
    let dir = tempfile::tempdir().unwrap();
    let easy = dir.path().join("easy");
    let (v, code) = cadfit(&["gen", "--n", "10", "--complexity", "easy", "--seed", "4", "--out", p(&easy)]);
    assert_eq!(code, 0);
    assert_eq!(v["files"].as_array().unwrap().len(), 10);
    for i in 0..10 {
        let mesh = load_mesh(easy.join(format!("easy_{i:03}.stl"))).unwrap();
        assert!(mesh.is_watertight());
        let program =
            deserialize_program(&fs::read_to_string(easy.join(format!("easy_{i:03}.json"))).unwrap()).unwrap();
        assert!((1..=2).contains(&program.len()));
    }

    let med = |name: &str| {
        let out = dir.path().join(name);
        assert_eq!(cadfit(&["gen", "--n", "5", "--complexity", "medium", "--seed", "9", "--out", p(&out)]).1, 0);
        (0..5)
            .map(|i| {
                let stem = format!("medium_{i:03}");
                let text = fs::read_to_string(out.join(format!("{stem}.json"))).unwrap();
                let program = deserialize_program(&text).unwrap();
                assert!(program.ops.iter().any(|o| o.role == Role::Cut));
                (text, fs::read(out.join(format!("{stem}.stl"))).unwrap())
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(med("m1"), med("m2"));

    assert_eq!(cadfit(&["gen", "--n", "0", "--complexity", "hard", "--out", p(&easy)]).1, 3);
}

#[test]
fn sweep_dump_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = cube_stl(dir.path());
    let csv = dir.path().join("sweep.csv");
    let (v, code) = cadfit(&["sweep", p(&mesh), "--csv", p(&csv)]);
    assert_eq!(code, 0, "{v}");
    let text = fs::read_to_string(&csv).unwrap();
    let rows = text.lines().count();
    assert_eq!(rows as u64, v["rows"].as_u64().unwrap() + 1);

    let (_, code) = cadfit(&["sweep", p(&mesh), "--profile", "100000", "--csv", p(&csv)]);
    assert_eq!(code, 3);
}
