//! Extrusion height sweeps.
//!
//! For each side of the sketch plane the sweep walks heights
//! `h_j = ±j·Δ`. Two quantities are tracked with fixed, seeded samples:
//! the cap error `c_j` (mean squared distance from the profile region
//! lifted to `h_j` to the target surface) and the wall error of each slab
//! between consecutive heights (mean squared distance of the swept boundary
//! to the surface, counting points inside the target as zero). A height is
//! an end of the extrusion when the cap error has a local minimum below
//! the threshold, followed by a rise steeper than the slope threshold, and
//! every slab before it is within the threshold.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Candidate, CandidateKind, Provenance, SweepConfig};
use crate::error::{Error, Result};
use crate::geometry::{Plane, Vec2};
use crate::metrics::{one_sided_to, Target};
use crate::program::{sample_candidate_surface, sample_region, Boundary, OpKind, Operation, Role};
use crate::sketch::Profile;

/// Offsets the profile plane to the start of `[h_minus, h_plus]` and
/// returns it with the (snapped) height of the interval.
pub fn canonicalize_interval(plane: &Plane, h_minus: f64, h_plus: f64, step: f64) -> Result<(Plane, f64)> {
    let snap = |h: f64| if step > 0.0 { (h / step).round() * step } else { h };
    let (lo, hi) = (snap(h_minus.min(0.0)), snap(h_plus.max(0.0)));
    let height = hi - lo;
    if !(height > 0.0) {
        return Err(Error::ZeroInterval);
    }
    Ok((plane.offset(lo), height))
}

struct SideScan {
    /// signed heights
    h: Vec<f64>,
    cap: Vec<f64>,
    /// wall error of slab `[h_j, h_{j+1}]`
    wall: Vec<f64>,
}

struct Samples {
    cap: Vec<Vec2>,
    /// boundary point and slab fraction
    wall: Vec<(Vec2, f64)>,
}

fn draw_samples(profile: &Profile, cfg: &SweepConfig) -> Samples {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_ca95);
    let cap = sample_region(profile, &profile.index(), cfg.cap_samples, &mut rng);
    let boundary = Boundary::new(profile);
    let wall = (0..cfg.wall_samples)
        .map(|_| {
            let s = rng.random::<f64>();
            let t = rng.random::<f64>();
            (boundary.at(s), t)
        })
        .collect();
    Samples { cap, wall }
}

fn cap_error(profile: &Profile, s: &Samples, target: &dyn Target, h: f64) -> f64 {
    let tree = target.surface_tree();
    let pl = &profile.plane;
    s.cap
        .iter()
        .map(|q| tree.nearest_dist2(&pl.to_world_lifted(q, h)))
        .sum::<f64>()
        / s.cap.len() as f64
}

fn wall_error(profile: &Profile, s: &Samples, target: &dyn Target, h0: f64, h1: f64) -> f64 {
    let tree = target.surface_tree();
    let pl = &profile.plane;
    s.wall
        .iter()
        .map(|(q, t)| {
            let p = pl.to_world_lifted(q, h0 + t * (h1 - h0));
            if target.contains(&p) {
                0.0
            } else {
                tree.nearest_dist2(&p)
            }
        })
        .sum::<f64>()
        / s.wall.len() as f64
}

/// Scans one side (`sign = ±1`), stopping two heights past the first slab
/// whose wall leaves the target.
fn scan_side(profile: &Profile, s: &Samples, target: &dyn Target, cfg: &SweepConfig, sign: f64) -> SideScan {
    let limit = if sign > 0.0 { cfg.h_bounds.1 } else { -cfg.h_bounds.0 };
    let delta = limit / cfg.n_samples as f64;
    let mut scan = SideScan {
        h: vec![0.0],
        cap: vec![cap_error(profile, s, target, 0.0)],
        wall: Vec::new(),
    };
    let mut bad_at = None;
    for j in 1..=cfg.n_samples {
        let h = sign * j as f64 * delta;
        let prev = scan.h[j - 1];
        scan.wall.push(wall_error(profile, s, target, prev, h));
        scan.h.push(h);
        scan.cap.push(cap_error(profile, s, target, h));
        if bad_at.is_none() && scan.wall[j - 1] > cfg.cd_threshold {
            bad_at = Some(j);
        }
        if bad_at.is_some_and(|b| j >= b + 1) {
            break;
        }
    }
    scan
}

/// Refined signed heights where the extrusion may end on this side,
/// ordered from the sketch plane outward.
fn side_ends(scan: &SideScan, cfg: &SweepConfig) -> Vec<f64> {
    let mut ends = Vec::new();
    let n = scan.cap.len();
    let eps = cfg.cd_threshold;
    for j in 1..n.saturating_sub(1) {
        if scan.wall[..j].iter().any(|&w| w > eps) {
            break;
        }
        let (a, b, c) = (scan.cap[j - 1], scan.cap[j], scan.cap[j + 1]);
        let step = (scan.h[j + 1] - scan.h[j]).abs();
        let rising = (c - b) / step > cfg.slope_threshold;
        if b <= eps && b <= a && rising {
            let curv = a - 2.0 * b + c;
            let off = if curv > 0.0 {
                (0.5 * (a - c) / curv).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            ends.push(scan.h[j] + off * (scan.h[j + 1] - scan.h[j]));
        }
    }
    ends
}

fn make_candidate(profile: &Profile, target: &dyn Target, cfg: &SweepConfig, lo: f64, hi: f64) -> Option<Candidate> {
    let (plane, height) = canonicalize_interval(&profile.plane, lo, hi, cfg.translation_step).ok()?;
    let prof = Profile {
        plane,
        outer: profile.outer.clone(),
        holes: profile.holes.clone(),
    };
    let kind = OpKind::Extrude { height };
    let sample = sample_candidate_surface(&prof, &kind, cfg.candidate_samples, cfg.seed);
    if sample.points.is_empty() {
        return None;
    }
    let fit_error = one_sided_to(&sample.points, target.surface_tree());
    Some(Candidate {
        op: Operation::extrude(prof, height, Role::Union),
        fit_error,
        provenance: Provenance {
            plane_index: 0,
            profile_index: 0,
            kind: CandidateKind::Extrude,
            interval: (lo, hi),
        },
    })
}

/// Extrusion candidates for `profile`: the nearest and the farthest stable
/// extent on each side of the plane (or spanning both sides when the
/// sketch plane itself does not lie on the target surface).
pub fn sweep_extrude_heights(profile: &Profile, target: &dyn Target, cfg: &SweepConfig) -> Vec<Candidate> {
    if target.surface_points().is_empty() || profile.outer.len() < 3 {
        return Vec::new();
    }
    let samples = draw_samples(profile, cfg);
    if samples.cap.is_empty() {
        return Vec::new();
    }
    let pos = scan_side(profile, &samples, target, cfg, 1.0);
    let neg = scan_side(profile, &samples, target, cfg, -1.0);
    let ends_pos = side_ends(&pos, cfg);
    let ends_neg = side_ends(&neg, cfg);
    let pick = |e: &[f64]| -> Vec<f64> {
        match e {
            [] => vec![],
            [x] => vec![*x],
            [x, .., y] => vec![*x, *y],
        }
    };
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    if pos.cap[0] <= cfg.cd_threshold {
        intervals.extend(pick(&ends_pos).into_iter().map(|h| (0.0, h)));
        intervals.extend(pick(&ends_neg).into_iter().map(|h| (h, 0.0)));
    } else if !ends_pos.is_empty() && !ends_neg.is_empty() {
        let (p, n) = (pick(&ends_pos), pick(&ends_neg));
        intervals.push((n[0], p[0]));
        if p.len() > 1 || n.len() > 1 {
            intervals.push((*n.last().unwrap(), *p.last().unwrap()));
        }
    }
    let mut out: Vec<Candidate> = Vec::new();
    for (lo, hi) in intervals {
        if let Some(c) = make_candidate(profile, target, cfg, lo, hi) {
            if !out.iter().any(|o| o.op == c.op) {
                out.push(c);
            }
        }
    }
    out
}

/// One row of the debug sweep table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub h: f64,
    /// One-sided Chamfer error of the extrusion over `[0, h]`.
    pub d: f64,
    pub cap: f64,
    /// Wall error of the slab ending at `h` (0 at `h = 0`).
    pub wall: f64,
}

/// Full `(h, D(h))` table on both sides, for inspection.
pub fn sweep_table(profile: &Profile, target: &dyn Target, cfg: &SweepConfig) -> Vec<SweepRow> {
    let samples = draw_samples(profile, cfg);
    let mut rows = Vec::new();
    for sign in [-1.0, 1.0] {
        let limit = if sign > 0.0 { cfg.h_bounds.1 } else { -cfg.h_bounds.0 };
        let delta = limit / cfg.n_samples as f64;
        for j in 0..=cfg.n_samples {
            if sign < 0.0 && j == 0 {
                continue;
            }
            let h = sign * j as f64 * delta;
            let (lo, hi) = if h < 0.0 { (h, 0.0) } else { (0.0, h) };
            let d = if j == 0 {
                f64::NAN
            } else {
                let prof = Profile {
                    plane: profile.plane.offset(lo),
                    outer: profile.outer.clone(),
                    holes: profile.holes.clone(),
                };
                let s = sample_candidate_surface(&prof, &OpKind::Extrude { height: hi - lo }, cfg.candidate_samples, cfg.seed);
                one_sided_to(&s.points, target.surface_tree())
            };
            let wall = if j == 0 {
                0.0
            } else {
                let prev = sign * (j - 1) as f64 * delta;
                wall_error(profile, &samples, target, prev, h)
            };
            rows.push(SweepRow {
                h,
                d,
                cap: cap_error(profile, &samples, target, h),
                wall,
            });
        }
    }
    rows.sort_by(|a, b| a.h.total_cmp(&b.h));
    rows
}

pub fn write_sweep_csv(rows: &[SweepRow], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "h,d,cap,wall")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.h, r.d, r.cap, r.wall)?;
    }
    Ok(())
}
