//! Discrete extrude and revolve candidates for each sketch profile.

mod revolve;
mod sweep;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use revolve::{axis_hypotheses, fit_revolve, fit_revolve_with_axes};
pub use sweep::{canonicalize_interval, sweep_extrude_heights, sweep_table, write_sweep_csv, SweepRow};

use crate::assembly::FitConfig;
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec2};
use crate::metrics::Target;
use crate::program::Operation;
use crate::sketch::SketchCandidate;

/// Parameters of the per-profile parameter sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Sweep grid points per side of the sketch plane.
    pub n_samples: usize,
    pub cd_threshold: f64,
    pub slope_threshold: f64,
    pub translation_step: f64,
    pub h_bounds: (f64, f64),
    /// Cap points used to locate where a cap meets the target surface.
    pub cap_samples: usize,
    /// Wall points per sweep slab.
    pub wall_samples: usize,
    /// Points on the candidate surface for the one-sided Chamfer error.
    pub candidate_samples: usize,
    pub seed: u64,
}

impl SweepConfig {
    /// Sweep settings for a target with the given bounds.
    pub fn for_target(cfg: &FitConfig, bounds: &Aabb) -> Self {
        let d = bounds.diagonal().max(1e-9);
        SweepConfig {
            n_samples: cfg.sweep_samples,
            cd_threshold: cfg.cd_threshold,
            slope_threshold: cfg.slope_threshold,
            translation_step: cfg.translation_step,
            h_bounds: (-d, d),
            cap_samples: 128,
            wall_samples: 16,
            candidate_samples: cfg.candidate_samples,
            seed: cfg.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_samples < 8 {
            return bad("n_samples must be >= 8");
        }
        if !(self.cd_threshold > 0.0 && self.slope_threshold > 0.0 && self.translation_step > 0.0) {
            return bad("thresholds and translation_step must be > 0");
        }
        if !(self.h_bounds.0 < self.h_bounds.1) {
            return bad("h_bounds must satisfy h_min < h_max");
        }
        if self.cap_samples == 0 || self.wall_samples == 0 || self.candidate_samples == 0 {
            return bad("sample counts must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    Extrude,
    Revolve,
}

/// Where a candidate came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub plane_index: usize,
    pub profile_index: usize,
    pub kind: CandidateKind,
    /// Signed sweep interval for extrusions; axis direction for revolves.
    pub interval: (f64, f64),
}

impl Provenance {
    pub fn cmp_key(&self, other: &Self) -> Ordering {
        (self.plane_index, self.profile_index, self.kind)
            .cmp(&(other.plane_index, other.profile_index, other.kind))
            .then(self.interval.0.total_cmp(&other.interval.0))
            .then(self.interval.1.total_cmp(&other.interval.1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// The operation; its role is set during assembly.
    pub op: Operation,
    /// One-sided Chamfer error of the candidate surface against the target.
    pub fit_error: f64,
    pub provenance: Provenance,
}

/// Orders by fit error, then provenance.
pub fn candidate_order(a: &Candidate, b: &Candidate) -> Ordering {
    a.fit_error
        .total_cmp(&b.fit_error)
        .then_with(|| a.provenance.cmp_key(&b.provenance))
}

/// Extrude and revolve candidates for every profile. Revolve axis
/// hypotheses pool the points of all profiles sharing a sketch plane, so
/// the two halves of a section through a revolved part agree on the axis.
pub fn generate_candidates(profiles: &[SketchCandidate], target: &dyn Target, cfg: &FitConfig) -> Vec<Candidate> {
    use rayon::prelude::*;
    let sweep_cfg = SweepConfig::for_target(cfg, &target.bounds());
    let mut out: Vec<Candidate> = profiles
        .par_iter()
        .flat_map_iter(|sc| {
            let mut cands = sweep_extrude_heights(&sc.profile, target, &sweep_cfg);
            let plane_points: Vec<Vec2> = profiles
                .iter()
                .filter(|o| o.plane_index == sc.plane_index)
                .flat_map(|o| o.profile.outer.points.iter().copied())
                .collect();
            let mut axes = axis_hypotheses(&sc.profile.outer.points);
            for a in axis_hypotheses(&plane_points) {
                if !axes.iter().any(|b| same_axis(b, &a)) {
                    axes.push(a);
                }
            }
            cands.extend(fit_revolve_with_axes(&sc.profile, target, &sweep_cfg, &axes));
            for c in &mut cands {
                c.provenance.plane_index = sc.plane_index;
                c.provenance.profile_index = sc.profile_index;
            }
            cands
        })
        .collect();
    out.sort_by(candidate_order);
    out
}

pub(crate) fn same_axis(a: &(Vec2, Vec2), b: &(Vec2, Vec2)) -> bool {
    let (pa, da) = a;
    let (pb, db) = b;
    da.dot(db) > 1.0 - 1e-9 && (da.x * (pb - pa).y - da.y * (pb - pa).x).abs() < 1e-9
}
