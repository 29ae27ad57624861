use std::f64::consts::FRAC_PI_4;

use nalgebra::{Matrix2, SymmetricEigen};

use super::{same_axis, Candidate, CandidateKind, Provenance, SweepConfig};
use crate::geometry::Vec2;
use crate::metrics::{one_sided_to, Target};
use crate::program::{profile_left_of_axis, sample_candidate_surface, OpKind, Operation, Role};
use crate::sketch::Profile;

/// Directed axis hypotheses `(point, unit direction)` through the centroid
/// of `points`: both principal directions and the principal direction
/// rotated by ±45°, each in both senses.
pub fn axis_hypotheses(points: &[Vec2]) -> Vec<(Vec2, Vec2)> {
    if points.len() < 2 {
        return Vec::new();
    }
    let c = points.iter().sum::<Vec2>() / points.len() as f64;
    let mut cov = Matrix2::zeros();
    for p in points {
        let d = p - c;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let k = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
    let mut e1: Vec2 = eig.eigenvectors.column(k).into_owned();
    // fix the eigenvector sign so hypotheses are reproducible
    if e1.x < 0.0 || (e1.x == 0.0 && e1.y < 0.0) {
        e1 = -e1;
    }
    let rot = |v: Vec2, a: f64| Vec2::new(v.x * a.cos() - v.y * a.sin(), v.x * a.sin() + v.y * a.cos());
    let mut out: Vec<(Vec2, Vec2)> = Vec::new();
    for a in [0.0, 2.0 * FRAC_PI_4, FRAC_PI_4, -FRAC_PI_4] {
        for sense in [1.0, -1.0] {
            let d = rot(e1, a) * sense;
            let cand = (c, d);
            if !out.iter().any(|o| same_axis(o, &cand)) {
                out.push(cand);
            }
        }
    }
    out
}

/// Best full-turn revolve of `profile` about its own axis hypotheses.
pub fn fit_revolve(profile: &Profile, target: &dyn Target, cfg: &SweepConfig) -> Option<Candidate> {
    let axes = axis_hypotheses(&profile.outer.points);
    fit_revolve_with_axes(profile, target, cfg, &axes)
}

/// Evaluates every hypothesis the profile lies to the left of and returns
/// the one with the lowest one-sided Chamfer error, if within threshold.
pub fn fit_revolve_with_axes(
    profile: &Profile,
    target: &dyn Target,
    cfg: &SweepConfig,
    axes: &[(Vec2, Vec2)],
) -> Option<Candidate> {
    if target.surface_points().is_empty() {
        return None;
    }
    let mut best: Option<Candidate> = None;
    for (i, &(point, dir)) in axes.iter().enumerate() {
        if !profile_left_of_axis(profile, point, dir) {
            continue;
        }
        let kind = OpKind::Revolve {
            axis_point: point,
            axis_dir: dir,
        };
        let s = sample_candidate_surface(profile, &kind, cfg.candidate_samples, cfg.seed);
        if s.points.is_empty() {
            continue;
        }
        let err = one_sided_to(&s.points, target.surface_tree());
        if err <= cfg.cd_threshold && best.as_ref().is_none_or(|b| err < b.fit_error) {
            best = Some(Candidate {
                op: Operation::revolve(profile.clone(), point, dir, Role::Union),
                fit_error: err,
                provenance: Provenance {
                    plane_index: 0,
                    profile_index: 0,
                    kind: CandidateKind::Revolve,
                    interval: (i as f64, 0.0),
                },
            });
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypotheses_are_unit_and_distinct() {
        let pts: Vec<Vec2> = (0..40).map(|i| Vec2::new(i as f64 * 0.1, (i % 3) as f64 * 0.01)).collect();
        let h = axis_hypotheses(&pts);
        assert_eq!(h.len(), 8);
        for (_, d) in &h {
            assert!((d.norm() - 1.0).abs() < 1e-12);
        }
        // principal direction is along x
        assert!(h[0].1.x > 0.99);
    }
}
