//! Heuristic sketch-profile scoring and the stochastic budgeted filter.
//!
//! The score estimates how useful a profile is for reconstructing the
//! target. Any scorer producing values in `[0, 1]` can replace
//! [`score_profile`]; the filter only consumes the scores.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{FitConfig, PriorWeights};
use crate::geometry::PlaneSource;
use crate::metrics::Target;
use crate::sketch::SketchCandidate;

/// Minimum number of profiles the filter keeps (when available).
pub const MIN_KEEP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileScore {
    pub plane_index: usize,
    pub profile_index: usize,
    pub p: f64,
}

/// Weighted sum of: the fraction of loop vertices within `2δ` of the target
/// surface, profile area relative to the largest bounding-box
/// cross-section, primitive compactness `1 / (1 + elements / 8)`, and a
/// bonus for planar-cluster provenance.
pub fn score_profile(target: &dyn Target, candidate: &SketchCandidate, weights: &PriorWeights, slice_offset: f64) -> f64 {
    let profile = &candidate.profile;
    let plane = &profile.plane;
    let tree = target.surface_tree();
    let reach = (2.0 * slice_offset).powi(2);
    let (mut near, mut total) = (0usize, 0usize);
    for ring in profile.rings() {
        for q in &ring.points {
            total += 1;
            if tree.nearest_dist2(&plane.to_world(q)) <= reach {
                near += 1;
            }
        }
    }
    let proximity = if total == 0 { 0.0 } else { near as f64 / total as f64 };
    let s = target.bounds().size();
    let section = (s.x * s.y).max(s.y * s.z).max(s.x * s.z);
    let area = if section > 0.0 {
        (profile.area() / section).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let compactness = 1.0 / (1.0 + candidate.elements as f64 / 8.0);
    let provenance = match candidate.source {
        PlaneSource::Planar => 1.0,
        PlaneSource::Axis => 0.5,
    };
    (weights.proximity * proximity
        + weights.area * area
        + weights.compactness * compactness
        + weights.provenance * provenance)
        .clamp(0.0, 1.0)
}

pub fn score_profiles(target: &dyn Target, candidates: &[SketchCandidate], cfg: &FitConfig) -> Vec<ProfileScore> {
    candidates
        .par_iter()
        .map(|c| ProfileScore {
            plane_index: c.plane_index,
            profile_index: c.profile_index,
            p: score_profile(target, c, &cfg.prior_weights, cfg.slice_offset),
        })
        .collect()
}

/// Keeps each profile with probability equal to its score, then caps the
/// survivors at `budget` (highest scores first) and backfills by score up
/// to `min(8, n)`. Returns indices into `scores` in increasing order.
pub fn filter_profiles(scores: &[f64], budget: usize, seed: u64) -> Vec<usize> {
    let budget = budget.max(1);
    let n = scores.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep: Vec<bool> = scores
        .iter()
        .map(|&p| rng.random::<f64>() < p.clamp(0.0, 1.0))
        .collect();
    let by_rank = |idx: &mut Vec<usize>| {
        idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    };
    let mut kept: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
    if kept.len() > budget {
        by_rank(&mut kept);
        kept.truncate(budget);
        keep = vec![false; n];
        for &i in &kept {
            keep[i] = true;
        }
    }
    let floor = MIN_KEEP.min(n).min(budget);
    if kept.len() < floor {
        let mut rest: Vec<usize> = (0..n).filter(|&i| !keep[i]).collect();
        by_rank(&mut rest);
        for i in rest.into_iter().take(floor - kept.len()) {
            keep[i] = true;
        }
    }
    (0..n).filter(|&i| keep[i]).collect()
}
