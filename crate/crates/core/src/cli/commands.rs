use std::fs;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use super::generate::{random_program, Complexity};
use crate::assembly::{comparison_spec, iterative_fit, FitConfig};
use crate::candidates::{sweep_table, write_sweep_csv, SweepConfig};
use crate::error::{Error, Result};
use crate::geometry::{load_mesh, normalize_mesh, sample_surface, write_stl, Aabb, MeshIndex, TriMesh, Vec3};
use crate::metrics::{
    align_similarity, chamfer_distance, compute_residuals, iou_exact, voxelize, ChamferMode, MeshTarget, Similarity,
};
use crate::program::{deserialize_program, emit_script, serialize_program, tessellate_solid, Solid};
use crate::sketch::extract_sketch_candidates;

/// Tessellation resolution for generated and reconstructed meshes.
pub const MESH_RESOLUTION: usize = 128;
/// Grid resolution and sample count of the evaluation metrics.
pub const EVAL_RESOLUTION: usize = 64;
pub const EVAL_SAMPLES: usize = 8192;

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn load_config(path: Option<&Path>) -> Result<FitConfig> {
    match path {
        None => Ok(FitConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            FitConfig::from_json(&text)
        }
    }
}

/// Fits `mesh_path` and writes program.json, program.py, reconstruction.stl,
/// report.json and manifest.json into `out`. Returns the stdout summary.
pub fn reconstruct_to_dir(mesh_path: &Path, cfg: &FitConfig, out: &Path, threads: usize) -> Result<Value> {
    let mesh = load_mesh(mesh_path)?;
    let (program, report) = iterative_fit(&mesh, cfg)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let invalid = program.is_empty();
    let paths = [
        ("program", out.join("program.json")),
        ("script", out.join("program.py")),
        ("mesh", out.join("reconstruction.stl")),
        ("report", out.join("report.json")),
    ];
    write_file(&paths[0].1, serialize_program(&program) + "\n")?;
    write_file(&paths[1].1, emit_script(&program))?;
    let mut written_mesh = false;
    if !invalid {
        let solid = Solid::new(program.clone())?;
        match tessellate_solid(&solid, MESH_RESOLUTION.max(cfg.iou_resolution)) {
            Ok(m) => {
                write_stl(&m, &paths[2].1)?;
                written_mesh = true;
            }
            Err(Error::EmptySolid) => {}
            Err(e) => return Err(e),
        }
    }
    let mut report_value = serde_json::to_value(&report).expect("report serializes");
    report_value["invalid"] = json!(invalid);
    write_file(&paths[3].1, report_value.to_string() + "\n")?;

    let outputs: serde_json::Map<String, Value> = paths
        .iter()
        .filter(|(k, _)| *k != "mesh" || written_mesh)
        .map(|(k, p)| (k.to_string(), json!(p.display().to_string())))
        .collect();
    let manifest = json!({
        "tool": "cadfit",
        "version": env!("CARGO_PKG_VERSION"),
        "input": mesh_path.display().to_string(),
        "seed": cfg.seed,
        "threads": threads,
        "config": cfg,
        "outputs": outputs,
        "wall_time_s": report.wall_time,
    });
    write_file(&out.join("manifest.json"), manifest.to_string() + "\n")?;

    Ok(json!({
        "ok": true,
        "command": "reconstruct",
        "out": out.display().to_string(),
        "ops": report.ops,
        "iou": report.iou,
        "invalid": invalid,
        "a": report.a,
        "b": report.b,
        "E": report.error.e,
        "wall_time_s": report.wall_time,
    }))
}

pub(super) fn reconstruct(
    mesh: &Path,
    config: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
    threads: usize,
) -> Result<Value> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    reconstruct_to_dir(mesh, &cfg, out, threads)
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub align: bool,
}

fn finite_or_inf<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("inf")
    }
}

/// Metrics of a prediction against ground truth. An invalid prediction
/// reports IoU 0 and the Chamfer sentinel `"inf"`.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub iou: f64,
    #[serde(serialize_with = "finite_or_inf")]
    pub cd: f64,
    pub invalid: bool,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "E")]
    pub e: f64,
    /// Fitted similarity; `null` with `--no-align`.
    pub align: Option<Similarity>,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl EvalReport {
    fn invalid(reason: String) -> Self {
        EvalReport {
            iou: 0.0,
            cd: f64::INFINITY,
            invalid: true,
            a: 1.0,
            b: 0.0,
            e: 1.0,
            align: None,
            samples: EVAL_SAMPLES,
            reason: Some(reason),
        }
    }
}

enum Pred {
    Program(Solid),
    Mesh(MeshIndex),
}

impl Pred {
    fn contains(&self, p: &Vec3) -> bool {
        match self {
            Pred::Program(s) => s.contains(p),
            Pred::Mesh(m) => m.contains(p),
        }
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Loads the prediction; `Ok(Err(reason))` marks an invalid prediction.
fn load_pred(path: &Path) -> Result<std::result::Result<(Pred, TriMesh), String>> {
    if is_json(path) {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let program = match deserialize_program(&text) {
            Ok(p) => p,
            Err(e) => return Ok(Err(e.to_string())),
        };
        if program.is_empty() {
            return Ok(Err("empty program".into()));
        }
        let solid = match Solid::new(program) {
            Ok(s) => s,
            Err(e) => return Ok(Err(e.to_string())),
        };
        match tessellate_solid(&solid, MESH_RESOLUTION) {
            Ok(mesh) => Ok(Ok((Pred::Program(solid), mesh))),
            Err(e @ Error::EmptySolid) => Ok(Err(e.to_string())),
            Err(e) => Err(e),
        }
    } else {
        let mesh = load_mesh(path)?;
        Ok(Ok((Pred::Mesh(MeshIndex::new(&mesh)), mesh)))
    }
}

fn transformed_bounds(b: &Aabb, t: &Similarity) -> Aabb {
    let mut out = Aabb::empty();
    for i in 0..8 {
        let c = Vec3::new(
            if i & 1 == 0 { b.min.x } else { b.max.x },
            if i & 2 == 0 { b.min.y } else { b.max.y },
            if i & 4 == 0 { b.min.z } else { b.max.z },
        );
        out.grow(&t.apply(&c));
    }
    out
}

/// Aligns the prediction to the ground truth (unless disabled) and reports
/// IoU, symmetric Chamfer distance and the residual decomposition.
pub fn eval_paths(pred_path: &Path, gt_path: &Path, opts: &EvalOptions) -> Result<EvalReport> {
    let gt = load_mesh(gt_path)?;
    let gt_index = MeshIndex::new(&gt);
    let (pred, pred_mesh) = match load_pred(pred_path)? {
        Ok(v) => v,
        Err(reason) => return Ok(EvalReport::invalid(reason)),
    };
    let gt_pts = sample_surface(&gt, EVAL_SAMPLES, 0);
    let pred_pts = sample_surface(&pred_mesh, EVAL_SAMPLES, 0);
    let t = if opts.align {
        align_similarity(&pred_pts, &gt_pts)?.similarity
    } else {
        Similarity::default()
    };
    let moved = t.apply_all(&pred_pts);
    let cd = chamfer_distance(&moved, &gt_pts, ChamferMode::Symmetric)?;

    let spec = comparison_spec(&gt.bounds(), &transformed_bounds(&pred_mesh.bounds(), &t), EVAL_RESOLUTION);
    let goal = voxelize(|p| gt_index.contains(p), &spec);
    let solid = voxelize(|p| pred.contains(&t.apply_inverse(p)), &spec);
    let iou = iou_exact(&solid, &goal)?.value();
    let res = compute_residuals(&goal, &solid)?;
    Ok(EvalReport {
        iou,
        cd,
        invalid: false,
        a: res.a(),
        b: res.b(),
        e: res.a() + res.b(),
        align: opts.align.then_some(t),
        samples: EVAL_SAMPLES,
        reason: None,
    })
}

/// Writes `n` program JSON / STL pairs named `<complexity>_<index>`.
pub fn write_benchmark(n: usize, c: Complexity, seed: u64, out: &Path) -> Result<Value> {
    if n == 0 {
        return Err(Error::Config("--n must be at least 1".into()));
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut files: Vec<(PathBuf, PathBuf)> = Vec::with_capacity(n);
    for i in 0..n {
        let program = random_program(c, seed, i)?;
        let solid = Solid::new(program.clone())?;
        let mesh = tessellate_solid(&solid, MESH_RESOLUTION)?;
        let stem = format!("{}_{i:03}", c.name());
        let json_path = out.join(format!("{stem}.json"));
        let stl_path = out.join(format!("{stem}.stl"));
        write_file(&json_path, serialize_program(&program) + "\n")?;
        write_stl(&mesh, &stl_path)?;
        files.push((json_path, stl_path));
    }
    Ok(json!({
        "ok": true,
        "command": "gen",
        "complexity": c.name(),
        "n": n,
        "seed": seed,
        "files": files
            .iter()
            .map(|(j, s)| json!({"program": j.display().to_string(), "mesh": s.display().to_string()}))
            .collect::<Vec<_>>(),
    }))
}

pub(super) fn sweep(mesh_path: &Path, profile: usize, config: Option<&Path>, csv: &Path) -> Result<Value> {
    let cfg = load_config(config)?;
    let mesh = load_mesh(mesh_path)?;
    mesh.check_watertight()?;
    let (norm, _, _) = normalize_mesh(&mesh)?;
    let target = MeshTarget::new(norm, cfg.target_samples, cfg.seed)?;
    let profiles = extract_sketch_candidates(&target, &cfg);
    let Some(sc) = profiles.get(profile) else {
        return Err(Error::Config(format!(
            "profile {profile} out of range ({} profiles)",
            profiles.len()
        )));
    };
    use crate::metrics::Target;
    let scfg = SweepConfig::for_target(&cfg, &target.bounds());
    let rows = sweep_table(&sc.profile, &target, &scfg);
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf).map_err(|e| Error::io(csv, e))?;
    write_file(csv, buf)?;
    Ok(json!({
        "ok": true,
        "command": "sweep",
        "profiles": profiles.len(),
        "profile": profile,
        "plane_index": sc.plane_index,
        "rows": rows.len(),
        "csv": csv.display().to_string(),
    }))
}
