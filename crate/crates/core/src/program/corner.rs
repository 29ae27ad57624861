use std::f64::consts::PI;

use super::ir::FeatureKind;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::sketch::{Loop2D, Profile};

/// Points used to polygonize a fillet arc, endpoints included.
pub const FILLET_POINTS: usize = 16;

/// Corners turning less than this are not treated as corners.
const MIN_TURN_DEG: f64 = 5.0;

struct Corner {
    p: Vec2,
    d1: Vec2,
    d2: Vec2,
    shorter: f64,
    turn: f64,
}

fn corner(points: &[Vec2], i: usize) -> Option<Corner> {
    let n = points.len();
    if i >= n || n < 3 {
        return None;
    }
    let p = points[i];
    let a = points[(i + n - 1) % n] - p;
    let b = points[(i + 1) % n] - p;
    let (la, lb) = (a.norm(), b.norm());
    if la == 0.0 || lb == 0.0 {
        return None;
    }
    let (d1, d2) = (a / la, b / lb);
    let interior = d1.dot(&d2).clamp(-1.0, 1.0).acos();
    Some(Corner {
        p,
        d1,
        d2,
        shorter: la.min(lb),
        turn: PI - interior,
    })
}

/// Distance from the corner to where a feature of size `param` meets each
/// adjacent edge.
fn setback(c: &Corner, kind: FeatureKind, param: f64) -> f64 {
    match kind {
        FeatureKind::Chamfer => param,
        FeatureKind::Fillet => param * (c.turn / 2.0).tan(),
    }
}

/// Largest admissible parameter at corner `i`: the parameter and the
/// resulting setback must both stay within half the shorter adjacent edge.
pub fn corner_limit(points: &[Vec2], i: usize, kind: FeatureKind) -> f64 {
    let Some(c) = corner(points, i) else {
        return 0.0;
    };
    if c.turn < MIN_TURN_DEG.to_radians() {
        return 0.0;
    }
    let half = c.shorter / 2.0;
    let per_unit = setback(&c, kind, 1.0);
    if per_unit > 1.0 {
        half / per_unit
    } else {
        half
    }
}

/// Replaces outer-loop vertex `corner_index` by a fillet arc of radius
/// `param` or by a chamfer with setback `param` along both edges.
pub fn apply_corner_feature(
    profile: &Profile,
    corner_index: usize,
    kind: FeatureKind,
    param: f64,
) -> Result<Profile> {
    let pts = &profile.outer.points;
    let c = corner(pts, corner_index).ok_or_else(|| {
        Error::CornerFeature(format!(
            "corner {corner_index} out of range for a loop of {} points",
            pts.len()
        ))
    })?;
    if c.turn < MIN_TURN_DEG.to_radians() {
        return Err(Error::CornerFeature(format!(
            "vertex {corner_index} turns by less than {MIN_TURN_DEG} degrees"
        )));
    }
    let limit = corner_limit(pts, corner_index, kind);
    if !(param > 0.0 && param <= limit) {
        return Err(Error::CornerFeature(format!(
            "param {param} outside (0, {limit}] for the adjacent edges"
        )));
    }
    let t = setback(&c, kind, param);
    let t1 = c.p + c.d1 * t;
    let t2 = c.p + c.d2 * t;
    let replacement: Vec<Vec2> = match kind {
        FeatureKind::Chamfer => vec![t1, t2],
        FeatureKind::Fillet => {
            let bis = (c.d1 + c.d2).normalize();
            let interior = PI - c.turn;
            let center = c.p + bis * (param / (interior / 2.0).sin());
            let a1 = (t1 - center).y.atan2((t1 - center).x);
            let a2 = (t2 - center).y.atan2((t2 - center).x);
            let mut sweep = a2 - a1;
            while sweep > PI {
                sweep -= 2.0 * PI;
            }
            while sweep < -PI {
                sweep += 2.0 * PI;
            }
            (0..FILLET_POINTS)
                .map(|k| {
                    if k == 0 {
                        return t1;
                    }
                    if k == FILLET_POINTS - 1 {
                        return t2;
                    }
                    let a = a1 + sweep * k as f64 / (FILLET_POINTS - 1) as f64;
                    center + Vec2::new(a.cos(), a.sin()) * param
                })
                .collect()
        }
    };
    let mut out = Vec::with_capacity(pts.len() + replacement.len());
    out.extend_from_slice(&pts[..corner_index]);
    out.extend(replacement);
    out.extend_from_slice(&pts[corner_index + 1..]);
    Ok(Profile {
        plane: profile.plane,
        outer: Loop2D::new(out),
        holes: profile.holes.clone(),
    })
}
