//! End-to-end behaviour of extraction, candidate generation, assembly and
//! finishing on constructed targets.

mod common;

use cadfit::assembly::{
    backward_prune, greedy_select, reconstruct_once, recover_finishing, FitConfig, Workspace,
};
use cadfit::candidates::{
    fit_revolve, generate_candidates, sweep_extrude_heights, CandidateKind, SweepConfig,
};
use cadfit::geometry::{normalize_mesh, propose_sketch_planes, PlaneSource};
use cadfit::metrics::{iou_exact, GridSpec, MeshTarget, Target};
use cadfit::prior::score_profile;
use cadfit::program::{tessellate_solid, OpKind, Role};
use cadfit::sketch::{extract_sketch_candidates, Loop2D, SketchCandidate};
use cadfit::{iterative_fit, Aabb, Operation, Plane, Profile, Program, Solid, TriMesh, Vec2, Vec3, VoxelGrid};

use common::*;

/// Plane containing the world z axis as its `v` direction (`v = n × u`).
fn xz_plane() -> Plane {
    Plane::new(Vec3::zeros(), Vec3::new(0.0, -1.0, 0.0), Vec3::x())
}

fn revolve_mesh(outer: Vec<Vec2>, resolution: usize) -> TriMesh {
    let profile = Profile::new(xz_plane(), Loop2D::new(outer), vec![]);
    let op = Operation::revolve(profile, Vec2::zeros(), Vec2::new(0.0, 1.0), Role::Union);
    tessellate_solid(&Solid::new(Program::new(vec![op])).unwrap(), resolution).unwrap()
}

fn sphere_mesh(r: f64) -> TriMesh {
    // half disk at u <= 0, to the left of the upward axis
    let half: Vec<Vec2> = (0..=64)
        .map(|i| {
            let t = std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * i as f64 / 64.0;
            Vec2::new(t.cos() * r, t.sin() * r)
        })
        .collect();
    revolve_mesh(half, 64)
}

fn mesh_target(mesh: TriMesh) -> MeshTarget {
    MeshTarget::new(mesh, 8192, 0).unwrap()
}

fn program_mesh(ops: Vec<Operation>, resolution: usize) -> TriMesh {
    tessellate_solid(&Solid::new(Program::new(ops)).unwrap(), resolution).unwrap()
}

#[test]
fn sphere_proposes_axis_planes_only() {
    let mesh = sphere_mesh(0.8);
    let cfg = FitConfig::default();
    let planes = propose_sketch_planes(&mesh, &cfg);
    assert!(!planes.is_empty());
    assert!(planes.iter().all(|p| p.source == PlaneSource::Axis));
}

#[test]
fn sphere_sections_are_near_circles() {
    let target = mesh_target(sphere_mesh(0.8));
    let profiles = extract_sketch_candidates(&target, &FitConfig::default());
    assert!(!profiles.is_empty());
    for sc in &profiles {
        let pts = &sc.profile.outer.points;
        let c = sc.profile.outer.centroid();
        let radii: Vec<f64> = pts.iter().map(|p| (p - c).norm()).collect();
        let (lo, hi) = radii
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        assert!(hi - lo < 0.05 * hi, "section not circular: radii in [{lo}, {hi}]");
    }
}

#[test]
fn sweep_recovers_half_depth_and_rejects_disjoint_profile() {
    let target = mesh_target(TriMesh::cuboid(Vec3::zeros(), Vec3::new(1.0, 1.0, 0.5)));
    let bounds = target.bounds();
    let scfg = SweepConfig::for_target(&FitConfig::default(), &bounds);
    let step = (scfg.h_bounds.1 - scfg.h_bounds.0) / (2.0 * scfg.n_samples as f64);
    let profile = rect_profile(xy_plane(0.0), Vec2::zeros(), Vec2::repeat(1.0));
    let cands = sweep_extrude_heights(&profile, &target, &scfg);
    let best = cands
        .iter()
        .filter_map(|c| match c.op.kind {
            OpKind::Extrude { height } => Some((height.abs() - 0.5).abs()),
            _ => None,
        })
        .fold(f64::INFINITY, f64::min);
    assert!(best <= step, "height error {best} > step {step}");

    let far = rect_profile(xy_plane(5.0), Vec2::new(4.0, 4.0), Vec2::new(5.0, 5.0));
    assert!(sweep_extrude_heights(&far, &target, &scfg).is_empty());
}

#[test]
fn straddling_square_has_no_revolve() {
    let target = mesh_target(TriMesh::cuboid(Vec3::repeat(-0.5), Vec3::repeat(0.5)));
    let scfg = SweepConfig::for_target(&FitConfig::default(), &target.bounds());
    let square = rect_profile(xz_plane(), Vec2::repeat(-0.5), Vec2::repeat(0.5));
    assert!(fit_revolve(&square, &target, &scfg).is_none());
}

fn section_candidates(outer: [Vec<Vec2>; 2]) -> Vec<SketchCandidate> {
    outer
        .into_iter()
        .enumerate()
        .map(|(i, pts)| SketchCandidate {
            profile: Profile::new(xz_plane(), Loop2D::new(pts), vec![]),
            source: PlaneSource::Axis,
            plane_index: 0,
            profile_index: i,
            elements: 4,
        })
        .collect()
}

fn has_axis_revolve(cands: &[cadfit::candidates::Candidate], cd: f64) -> bool {
    cands.iter().any(|c| match c.op.kind {
        OpKind::Revolve { axis_point, axis_dir } => {
            c.provenance.kind == CandidateKind::Revolve
                && c.fit_error < cd
                && axis_dir.x.abs() < 1e-6
                && axis_point.x.abs() < 1e-6
        }
        _ => false,
    })
}

#[test]
fn annulus_section_revolves_about_pooled_axis() {
    let left = rect(Vec2::new(-0.8, 0.0), Vec2::new(-0.4, 1.0));
    let right = rect(Vec2::new(0.4, 0.0), Vec2::new(0.8, 1.0));
    let target = mesh_target(revolve_mesh(left.clone(), 96));
    let cfg = FitConfig::default();
    let cands = generate_candidates(&section_candidates([left, right]), &target, &cfg);
    assert!(has_axis_revolve(&cands, cfg.cd_threshold));
}

#[test]
fn torus_section_revolves_about_pooled_axis() {
    let left = circle_points(Vec2::new(-0.6, 0.0), 0.2, 96);
    let right = circle_points(Vec2::new(0.6, 0.0), 0.2, 96);
    let target = mesh_target(revolve_mesh(left.clone(), 96));
    let cfg = FitConfig::default();
    let cands = generate_candidates(&section_candidates([left, right]), &target, &cfg);
    assert!(has_axis_revolve(&cands, cfg.cd_threshold));
}

fn workspace(mesh: &TriMesh, cfg: &FitConfig) -> (MeshTarget, Workspace) {
    let (norm, _, _) = normalize_mesh(mesh).unwrap();
    let target = MeshTarget::new(norm, cfg.target_samples, cfg.seed).unwrap();
    let ws = Workspace::new(&target, cfg).unwrap();
    (target, ws)
}

#[test]
fn cube_candidates_reproduce_the_cube() {
    let cfg = FitConfig::default();
    let (target, ws) = workspace(&TriMesh::cuboid(Vec3::zeros(), Vec3::repeat(1.0)), &cfg);
    let profiles = extract_sketch_candidates(&target, &cfg);
    let cands = generate_candidates(&profiles, &target, &cfg);
    let best = cands
        .iter()
        .map(|c| {
            let m = Solid::new(Program::new(vec![c.op.clone()])).unwrap().voxelize(&ws.spec);
            iou_exact(&m, &ws.goal).unwrap().value()
        })
        .fold(0.0, f64::max);
    assert!(best >= 0.95, "best single-candidate IoU {best}");
    assert!(generate_candidates(&[], &target, &cfg).is_empty());

    // duplicated profiles give duplicated candidates
    let twice: Vec<SketchCandidate> = profiles.iter().chain(profiles.iter()).cloned().collect();
    assert_eq!(generate_candidates(&twice, &target, &cfg).len(), 2 * cands.len());
}

#[test]
fn reconstruct_once_cube_is_one_op() {
    let cfg = FitConfig::default();
    let (target, ws) = workspace(&TriMesh::cuboid(Vec3::zeros(), Vec3::repeat(1.0)), &cfg);
    let (asm, stats) = reconstruct_once(&target, &ws.goal, &cfg, 0).unwrap();
    assert_eq!(asm.ops.len(), 1);
    assert!(asm.iou(&ws.goal).unwrap().value() >= 0.98);
    assert!(stats.candidates >= stats.admissible);
}

#[test]
fn reconstruct_once_cylinder() {
    let cfg = FitConfig::default();
    let (target, ws) = workspace(&cylinder_mesh(0.5, 1.0, 128), &cfg);
    let (asm, _) = reconstruct_once(&target, &ws.goal, &cfg, 0).unwrap();
    assert!(!asm.ops.is_empty());
    assert!(asm.iou(&ws.goal).unwrap().value() >= 0.95);
}

#[test]
fn l_shape_with_cut_corner() {
    let mesh = program_mesh(
        vec![
            extrude_box(Vec3::zeros(), Vec3::repeat(1.0), Role::Union),
            extrude_box(Vec3::repeat(0.5), Vec3::repeat(1.0), Role::Cut),
        ],
        96,
    );
    let (_, report) = iterative_fit(&mesh, &FitConfig::default()).unwrap();
    assert!(report.iou >= 0.95, "IoU {}", report.iou);
}

#[test]
fn perfect_first_pass_stops_at_first_iteration() {
    let (_, report) = iterative_fit(&TriMesh::cuboid(Vec3::zeros(), Vec3::repeat(1.0)), &FitConfig::default()).unwrap();
    assert!(report.converged);
    assert_eq!(report.iterations.len(), 1);
    assert!(report.iterations[0].subprograms.is_empty());
}

#[test]
fn zero_iterations_equals_single_pass() {
    let mesh = program_mesh(
        vec![
            extrude_box(Vec3::zeros(), Vec3::new(1.0, 1.0, 0.4), Role::Union),
            extrude_box(Vec3::new(0.2, 0.2, 0.4), Vec3::new(0.6, 0.6, 0.9), Role::Union),
        ],
        96,
    );
    let mut cfg = FitConfig::default();
    cfg.max_residual_iters = 0;
    cfg.finishing = false;
    let (program, report) = iterative_fit(&mesh, &cfg).unwrap();
    assert!(report.iterations.is_empty());

    let (norm, scale, center) = normalize_mesh(&mesh).unwrap();
    let target = MeshTarget::new(norm, cfg.target_samples, cfg.seed).unwrap();
    let ws = Workspace::new(&target, &cfg).unwrap();
    let (asm, _) = reconstruct_once(&target, &ws.goal, &cfg, 0).unwrap();
    assert_eq!(program, asm.program().transformed(1.0 / scale, &center));
}

fn grid() -> GridSpec {
    GridSpec::covering(&Aabb::new(Vec3::repeat(-1.0), Vec3::repeat(1.0)), 20)
}

fn box_grid(lo: Vec3, hi: Vec3) -> VoxelGrid {
    Solid::new(Program::new(vec![extrude_box(lo, hi, Role::Union)]))
        .unwrap()
        .voxelize(&grid())
}

#[test]
fn greedy_and_prune_examples() {
    let full = box_grid(Vec3::new(-0.6, -0.6, -0.6), Vec3::new(0.6, 0.6, 0.6));
    let left = box_grid(Vec3::new(-0.6, -0.6, -0.6), Vec3::new(0.0, 0.6, 0.6));
    let right = box_grid(Vec3::new(0.0, -0.6, -0.6), Vec3::new(0.6, 0.6, 0.6));
    let away = box_grid(Vec3::new(0.7, 0.7, 0.7), Vec3::new(0.95, 0.95, 0.95));

    assert!(greedy_select(&[away.clone()], &full).unwrap().chosen.is_empty());
    assert!(greedy_select(&[], &full).unwrap().chosen.is_empty());

    let unions = |n| vec![Role::Union; n];
    assert_eq!(backward_prune(std::slice::from_ref(&full), &unions(1), &full).unwrap(), vec![0]);
    // dropping `full` keeps IoU at 1 and ties go to the larger index
    let keep = backward_prune(&[left.clone(), right.clone(), full.clone()], &unions(3), &full).unwrap();
    assert_eq!(keep, vec![0, 1]);
    let keep = backward_prune(&[full.clone(), left, right], &unions(3), &full).unwrap();
    assert_eq!(keep, vec![0]);
}

#[test]
fn sharp_target_gets_no_features() {
    let op = extrude_box(Vec3::new(-0.5, -0.5, 0.0), Vec3::new(0.5, 0.5, 0.6), Role::Union);
    let solid = Solid::new(Program::new(vec![op.clone()])).unwrap();
    let b = solid.bounds();
    let spec = GridSpec::covering(&b.inflate(0.05 * b.diagonal()), 64);
    let goal = solid.voxelize(&spec);
    let mut ops = vec![op];
    let mut masks = vec![goal.clone()];
    let events = recover_finishing(&mut ops, &mut masks, &goal, &FitConfig::default()).unwrap();
    assert!(events.is_empty());
    assert!(ops[0].corner_features.is_empty());
}

#[test]
fn prior_scores() {
    let cfg = FitConfig::default();
    let target = mesh_target(TriMesh::cuboid(Vec3::zeros(), Vec3::repeat(1.0)));
    let face = SketchCandidate {
        profile: rect_profile(xy_plane(0.0), Vec2::zeros(), Vec2::repeat(1.0)),
        source: PlaneSource::Planar,
        plane_index: 0,
        profile_index: 0,
        elements: 4,
    };
    let s = score_profile(&target, &face, &cfg.prior_weights, cfg.slice_offset);
    assert!(s >= 0.6, "face score {s}");
    assert_eq!(s, score_profile(&target, &face, &cfg.prior_weights, cfg.slice_offset));

    let far = SketchCandidate {
        profile: Profile::new(xy_plane(6.0), Loop2D::new(circle_points(Vec2::new(5.0, 5.0), 0.1, 40)), vec![]),
        source: PlaneSource::Axis,
        plane_index: 1,
        profile_index: 0,
        elements: 40,
    };
    let s = score_profile(&target, &far, &cfg.prior_weights, cfg.slice_offset);
    assert!(s <= 0.3, "far score {s}");
}
