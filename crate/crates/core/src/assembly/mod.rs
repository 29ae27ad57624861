//! Program assembly: candidate masks, greedy selection, pruning, residual
//! refinement and corner finishing.

mod config;
mod finishing;
mod select;

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{FitConfig, PriorWeights, SketchSource};
pub use finishing::{recover_finishing, FinishingEvent};
pub use select::{backward_prune, compose, greedy_select, strip_leading_cuts, Selection};

use crate::candidates::generate_candidates;
use crate::error::{Error, Result};
use crate::geometry::{normalize_mesh, Aabb, TriMesh};
use crate::metrics::{
    compute_residuals, error_decomposition, iou_exact, residual_target, ErrorDecomposition, GridSpec, Iou,
    MeshTarget, Target, VoxelGrid,
};
use crate::prior::{filter_profiles, score_profiles, ProfileScore};
use crate::program::{Operation, Primitive, Program, Role};
use crate::sketch::extract_sketch_candidates;

/// Relative padding of the working grid and of the admissible region for
/// candidate bounding boxes.
const PAD: f64 = 0.05;

/// The voxel grid every mask of one reconstruction lives on.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub spec: GridSpec,
    pub goal: VoxelGrid,
}

impl Workspace {
    /// Grid over the target bounds padded by 5% of the diagonal, with
    /// `cfg.iou_resolution` cells along the longest side.
    pub fn new(target: &dyn Target, cfg: &FitConfig) -> Result<Self> {
        let b = target.bounds();
        let spec = GridSpec::covering(&b.inflate(PAD * b.diagonal()), cfg.iou_resolution);
        let goal = target.voxelize(&spec);
        if goal.is_empty() {
            return Err(Error::EmptyTarget);
        }
        Ok(Workspace { spec, goal })
    }
}

/// Operations with their masks on a shared grid.
#[derive(Debug, Clone, Default)]
pub struct Assembled {
    pub ops: Vec<Operation>,
    pub masks: Vec<VoxelGrid>,
}

impl Assembled {
    pub fn roles(&self) -> Vec<Role> {
        self.ops.iter().map(|o| o.role).collect()
    }

    pub fn grid(&self, spec: GridSpec) -> VoxelGrid {
        let mut g = VoxelGrid::empty(spec);
        for (m, op) in self.masks.iter().zip(&self.ops) {
            match op.role {
                Role::Union => g.or_assign(m),
                Role::Cut => g.and_not_assign(m),
            }
        }
        g
    }

    pub fn iou(&self, goal: &VoxelGrid) -> Result<Iou> {
        iou_exact(&self.grid(goal.spec), goal)
    }

    /// Keeps the operations at `keep`, in that order.
    fn select(&self, keep: &[usize]) -> Assembled {
        Assembled {
            ops: keep.iter().map(|&i| self.ops[i].clone()).collect(),
            masks: keep.iter().map(|&i| self.masks[i].clone()).collect(),
        }
    }

    fn prune(&self, goal: &VoxelGrid) -> Result<Assembled> {
        let keep = backward_prune(&self.masks, &self.roles(), goal)?;
        Ok(self.select(&keep))
    }

    fn extend(&mut self, other: Assembled, role: Role) {
        self.ops.extend(other.ops.into_iter().map(|o| o.with_role(role)));
        self.masks.extend(other.masks);
    }

    pub fn program(&self) -> Program {
        Program::new(self.ops.clone())
    }
}

/// Counts from one pass of profile extraction, candidate generation and
/// selection.
#[derive(Debug, Clone, Default, Serialize)]
pub struct OnceStats {
    pub profiles: usize,
    pub profiles_kept: usize,
    pub candidates: usize,
    pub admissible: usize,
    pub greedy_trace: Vec<f64>,
    pub selected: usize,
    pub pruned: usize,
    pub profile_scores: Vec<ProfileScore>,
}

/// Mixes an iteration salt into the seed.
fn salted(seed: u64, salt: u64) -> u64 {
    seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Extracts profiles from `target`, filters them with the prior, generates
/// candidates, and assembles a union-only program approximating `goal` by
/// greedy selection followed by backward pruning.
pub fn reconstruct_once(
    target: &dyn Target,
    goal: &VoxelGrid,
    cfg: &FitConfig,
    salt: u64,
) -> Result<(Assembled, OnceStats)> {
    let mut stats = OnceStats::default();
    let mut profiles = extract_sketch_candidates(target, cfg);
    stats.profiles = profiles.len();
    if cfg.use_prior {
        let scores = score_profiles(target, &profiles, cfg);
        let p: Vec<f64> = scores.iter().map(|s| s.p).collect();
        let keep = filter_profiles(&p, cfg.prior_budget, salted(cfg.seed, salt));
        profiles = keep.iter().map(|&i| profiles[i].clone()).collect();
        stats.profile_scores = scores;
    }
    stats.profiles_kept = profiles.len();

    let candidates = generate_candidates(&profiles, target, cfg);
    stats.candidates = candidates.len();
    let b = target.bounds();
    let admissible = b.inflate(PAD * b.diagonal());
    let spec = goal.spec;
    let prepared: Vec<(Operation, VoxelGrid)> = candidates
        .par_iter()
        .filter_map(|c| {
            let prim = Primitive::new(&c.op).ok()?;
            admissible.contains_box(&prim.bounds).then(|| (c.op.clone(), prim.voxelize(&spec)))
        })
        .collect();
    stats.admissible = prepared.len();
    let (ops, masks): (Vec<_>, Vec<_>) = prepared.into_iter().unzip();

    let sel = greedy_select(&masks, goal)?;
    stats.greedy_trace = sel.trace.clone();
    stats.selected = sel.chosen.len();
    let chosen = Assembled {
        ops: sel.chosen.iter().map(|&i| ops[i].clone().with_role(Role::Union)).collect(),
        masks: sel.chosen.iter().map(|&i| masks[i].clone()).collect(),
    };
    let pruned = chosen.prune(goal)?;
    stats.pruned = chosen.ops.len() - pruned.ops.len();
    log::debug!(
        "once: {} profiles, {} kept, {} candidates, {} selected, {} pruned",
        stats.profiles,
        stats.profiles_kept,
        stats.candidates,
        stats.selected,
        stats.pruned
    );
    Ok((pruned, stats))
}

/// Morphological opening with the 6-neighbourhood: removes parts of a
/// region thinner than three cells, such as the one-cell slivers left along
/// a well-fitted surface.
pub fn open_region(g: &VoxelGrid) -> VoxelGrid {
    let spec = g.spec;
    let [nx, ny, nz] = spec.dims;
    let at = |grid: &VoxelGrid, i: isize, j: isize, k: isize| {
        i >= 0
            && j >= 0
            && k >= 0
            && (i as usize) < nx
            && (j as usize) < ny
            && (k as usize) < nz
            && grid.get3(i as usize, j as usize, k as usize)
    };
    const N6: [(isize, isize, isize); 6] = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)];
    let eroded = VoxelGrid::from_fn(spec, |idx| {
        let [i, j, k] = spec.coords(idx).map(|c| c as isize);
        g.get(idx) && N6.iter().all(|(a, b, c)| at(g, i + a, j + b, k + c))
    });
    VoxelGrid::from_fn(spec, |idx| {
        let [i, j, k] = spec.coords(idx).map(|c| c as isize);
        eroded.get(idx) || N6.iter().any(|(a, b, c)| at(&eroded, i + a, j + b, k + c))
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StageEvent {
    pub stage: String,
    pub iou: f64,
    pub ops: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubprogramRecord {
    pub role: Role,
    pub region_cells: u64,
    pub ops: usize,
    pub iou_before: f64,
    pub iou_after: f64,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub a: f64,
    pub b: f64,
    pub subprograms: Vec<SubprogramRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Normalization {
    pub scale: f64,
    pub center: [f64; 3],
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub dims: [usize; 3],
    pub spacing: f64,
    pub target_cells: u64,
}

/// Everything the pipeline decided, in normalized units. Serializes
/// deterministically; the wall time is kept out of the JSON.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub seed: u64,
    pub normalization: Normalization,
    pub grid: GridInfo,
    pub initial: OnceStats,
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub finishing: Vec<FinishingEvent>,
    pub final_pruned: usize,
    pub stages: Vec<StageEvent>,
    /// IoU after every greedy pick of the first pass, then after every stage.
    pub iou_trace: Vec<f64>,
    pub ops: usize,
    pub iou: f64,
    pub a: f64,
    pub b: f64,
    pub error: ErrorDecomposition,
    #[serde(skip_serializing)]
    pub wall_time: f64,
}

/// Full reconstruction of a watertight mesh. The mesh is normalized to a
/// box of longest side 2 centered at the origin; the returned program is
/// mapped back to the input frame, the report stays in normalized units.
pub fn iterative_fit(mesh: &TriMesh, cfg: &FitConfig) -> Result<(Program, FitReport)> {
    let start = Instant::now();
    cfg.validate()?;
    mesh.check_watertight()?;
    let (norm, scale, center) = normalize_mesh(mesh)?;
    let target = MeshTarget::new(norm, cfg.target_samples, cfg.seed)?;
    let ws = Workspace::new(&target, cfg)?;
    let goal = &ws.goal;
    let mut stages = Vec::new();
    let stage = |stages: &mut Vec<StageEvent>, name: &str, a: &Assembled| -> Result<()> {
        stages.push(StageEvent {
            stage: name.to_string(),
            iou: a.iou(goal)?.value(),
            ops: a.ops.len(),
        });
        Ok(())
    };

    let (mut asm, initial) = reconstruct_once(&target, goal, cfg, 0)?;
    stage(&mut stages, "initial", &asm)?;

    let eps = cfg.residual_threshold;
    let mut iterations = Vec::new();
    let mut converged = false;
    for t in 1..=cfg.max_residual_iters {
        let res = compute_residuals(goal, &asm.grid(ws.spec))?;
        let mut rec = IterationRecord {
            iteration: t,
            a: res.a(),
            b: res.b(),
            subprograms: Vec::new(),
        };
        if res.a() <= eps && res.b() <= eps {
            converged = true;
            iterations.push(rec);
            break;
        }
        let mut accepted_any = false;
        for (k, role) in [Role::Union, Role::Cut].into_iter().enumerate() {
            // residuals are recomputed so a cut sees an accepted union
            let res = compute_residuals(goal, &asm.grid(ws.spec))?;
            let region = open_region(match role {
                Role::Union => &res.plus,
                Role::Cut => &res.minus,
            });
            if region.is_empty() {
                continue;
            }
            let before = res.counts.iou();
            let mut sub = SubprogramRecord {
                role,
                region_cells: region.count(),
                ops: 0,
                iou_before: before.value(),
                iou_after: before.value(),
                accepted: false,
                error: None,
            };
            let salt = (2 * t + k) as u64;
            let fitted = residual_target(&region).and_then(|rt| reconstruct_once(&rt, &region, cfg, salt));
            match fitted {
                Ok((part, _)) if !part.ops.is_empty() => {
                    sub.ops = part.ops.len();
                    let mut trial = asm.clone();
                    trial.extend(part, role);
                    let after = trial.iou(goal)?;
                    sub.iou_after = after.value();
                    if after > before {
                        sub.accepted = true;
                        accepted_any = true;
                        asm = trial;
                    }
                }
                Ok(_) => {}
                Err(e) => sub.error = Some(e.to_string()),
            }
            rec.subprograms.push(sub);
        }
        iterations.push(rec);
        stage(&mut stages, &format!("residual_{t}"), &asm)?;
        if !accepted_any {
            break;
        }
    }

    let mut finishing = Vec::new();
    if cfg.finishing && !asm.ops.is_empty() {
        finishing = recover_finishing(&mut asm.ops, &mut asm.masks, goal, cfg)?;
        stage(&mut stages, "finishing", &asm)?;
    }

    let before_prune = asm.ops.len();
    asm = asm.prune(goal)?;
    let final_pruned = before_prune - asm.ops.len();
    stage(&mut stages, "final", &asm)?;

    let res = compute_residuals(goal, &asm.grid(ws.spec))?;
    let error = error_decomposition(res.a(), res.b())?;
    let program = asm.program();
    program.validate()?;
    let iou_trace = initial
        .greedy_trace
        .iter()
        .copied()
        .chain(stages.iter().map(|s| s.iou))
        .collect();
    let report = FitReport {
        seed: cfg.seed,
        normalization: Normalization {
            scale,
            center: [center.x, center.y, center.z],
        },
        grid: GridInfo {
            dims: ws.spec.dims,
            spacing: ws.spec.spacing,
            target_cells: goal.count(),
        },
        initial,
        iterations,
        converged,
        finishing,
        final_pruned,
        stages,
        iou_trace,
        ops: program.len(),
        iou: res.counts.iou().value(),
        a: res.a(),
        b: res.b(),
        error,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((program.transformed(1.0 / scale, &center), report))
}

/// Voxel grid for comparing two solids or meshes in a common frame: the
/// union of both bounds padded by 5% of its diagonal.
pub fn comparison_spec(a: &Aabb, b: &Aabb, resolution: usize) -> GridSpec {
    let u = a.union(b);
    GridSpec::covering(&u.inflate(PAD * u.diagonal()), resolution)
}
