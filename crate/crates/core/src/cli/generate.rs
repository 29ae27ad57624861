//! Random valid programs for the synthetic round-trip benchmark.
//!
//! Parts are built around a base extrusion or lathe on the XY plane, in a
//! box of roughly 2 units. Unions are stacked on the top face, cuts are
//! through-holes and top pockets inside the base footprint.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{Plane, Vec2, Vec3};
use crate::program::{corner_limit, CornerFeature, FeatureKind, Operation, Program, Role, Solid};
use crate::sketch::{Loop2D, Profile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Complexity {
    Easy,
    Medium,
    Hard,
}

impl Complexity {
    pub fn name(&self) -> &'static str {
        match self {
            Complexity::Easy => "easy",
            Complexity::Medium => "medium",
            Complexity::Hard => "hard",
        }
    }
}

/// Sides of the polygon used for circles.
const CIRCLE_SIDES: usize = 48;

fn horizontal(z: f64) -> Plane {
    Plane::new(Vec3::new(0.0, 0.0, z), Vec3::z(), Vec3::x())
}

fn rect(cx: f64, cy: f64, w: f64, d: f64) -> Loop2D {
    let (hw, hd) = (w / 2.0, d / 2.0);
    Loop2D::new(vec![
        Vec2::new(cx - hw, cy - hd),
        Vec2::new(cx + hw, cy - hd),
        Vec2::new(cx + hw, cy + hd),
        Vec2::new(cx - hw, cy + hd),
    ])
}

fn circle(cx: f64, cy: f64, r: f64) -> Loop2D {
    Loop2D::new(
        (0..CIRCLE_SIDES)
            .map(|i| {
                let t = TAU * i as f64 / CIRCLE_SIDES as f64;
                Vec2::new(cx + r * t.cos(), cy + r * t.sin())
            })
            .collect(),
    )
}

fn l_shape(w: f64, d: f64, notch_w: f64, notch_d: f64) -> Loop2D {
    let (x0, y0) = (-w / 2.0, -d / 2.0);
    let (x1, y1) = (w / 2.0, d / 2.0);
    Loop2D::new(vec![
        Vec2::new(x0, y0),
        Vec2::new(x1, y0),
        Vec2::new(x1, y1 - notch_d),
        Vec2::new(x1 - notch_w, y1 - notch_d),
        Vec2::new(x1 - notch_w, y1),
        Vec2::new(x0, y1),
    ])
}

fn extrude(outer: Loop2D, z: f64, h: f64, role: Role) -> Operation {
    Operation::extrude(Profile::new(horizontal(z), outer, vec![]), h, role)
}

/// A lathe about the world z axis from a staircase profile in the XZ
/// half-plane `x ≤ 0`.
fn lathe(rng: &mut ChaCha8Rng) -> Operation {
    // plane frame: u = x, v = z; the axis is v through the origin
    let plane = Plane::new(Vec3::zeros(), Vec3::new(0.0, -1.0, 0.0), Vec3::x());
    let r0 = rng.random_range(0.6..1.0);
    let r1 = rng.random_range(0.25..0.8 * r0);
    let h0 = rng.random_range(0.3..0.8);
    let h1 = rng.random_range(0.3..0.8);
    let hole = if rng.random_bool(0.4) {
        rng.random_range(0.1..0.6 * r1)
    } else {
        0.0
    };
    let pts = vec![
        Vec2::new(-hole, 0.0),
        Vec2::new(-hole, h0 + h1),
        Vec2::new(-r1, h0 + h1),
        Vec2::new(-r1, h0),
        Vec2::new(-r0, h0),
        Vec2::new(-r0, 0.0),
    ];
    Operation::revolve(
        Profile::new(plane, Loop2D::new(pts), vec![]),
        Vec2::zeros(),
        Vec2::new(0.0, 1.0),
        Role::Union,
    )
}

struct Base {
    op: Operation,
    /// Footprint half extents in x and y.
    half: (f64, f64),
    height: f64,
    round: bool,
}

fn base(rng: &mut ChaCha8Rng, allow_lathe: bool) -> Base {
    let pick = rng.random_range(0..if allow_lathe { 4 } else { 3 });
    match pick {
        0 => {
            let (w, d) = (rng.random_range(1.0..2.0), rng.random_range(1.0..2.0));
            let h = rng.random_range(0.3..1.2);
            Base {
                op: extrude(rect(0.0, 0.0, w, d), 0.0, h, Role::Union),
                half: (w / 2.0, d / 2.0),
                height: h,
                round: false,
            }
        }
        1 => {
            let r = rng.random_range(0.5..1.0);
            let h = rng.random_range(0.3..1.5);
            Base {
                op: extrude(circle(0.0, 0.0, r), 0.0, h, Role::Union),
                half: (r * 0.7, r * 0.7),
                height: h,
                round: true,
            }
        }
        2 => {
            let (w, d) = (rng.random_range(1.2..2.0), rng.random_range(1.2..2.0));
            let h = rng.random_range(0.3..1.0);
            let nw = rng.random_range(0.25..0.4) * w;
            let nd = rng.random_range(0.25..0.4) * d;
            Base {
                op: extrude(l_shape(w, d, nw, nd), 0.0, h, Role::Union),
                half: (w / 2.0 - nw, d / 2.0 - nd),
                height: h,
                round: false,
            }
        }
        _ => {
            let op = lathe(rng);
            let b = Solid::new(Program::new(vec![op.clone()]))
                .map(|s| s.bounds())
                .unwrap_or_else(|_| crate::geometry::Aabb::empty());
            let height = b.max.z;
            Base {
                op,
                half: (0.0, 0.0),
                height,
                round: true,
            }
        }
    }
}

/// A box or cylinder standing on the top face of the base.
fn boss(rng: &mut ChaCha8Rng, b: &Base) -> Operation {
    let (hx, hy) = b.half;
    let h = rng.random_range(0.2..0.7);
    let z = b.height - 0.05;
    if rng.random_bool(0.5) {
        let w = rng.random_range(0.4..0.9) * 2.0 * hx;
        let d = rng.random_range(0.4..0.9) * 2.0 * hy;
        let cx = rng.random_range(-(hx - w / 2.0)..=(hx - w / 2.0));
        let cy = rng.random_range(-(hy - d / 2.0)..=(hy - d / 2.0));
        extrude(rect(cx, cy, w, d), z, h + 0.05, Role::Union)
    } else {
        let r = rng.random_range(0.3..0.8) * hx.min(hy);
        let cx = rng.random_range(-(hx - r)..=(hx - r));
        let cy = rng.random_range(-(hy - r)..=(hy - r));
        extrude(circle(cx, cy, r), z, h + 0.05, Role::Union)
    }
}

/// A through-hole or a pocket from the top, inside the footprint.
fn cut(rng: &mut ChaCha8Rng, b: &Base, top: f64) -> Operation {
    let (hx, hy) = b.half;
    let through = rng.random_bool(0.5);
    let (z, h) = if through {
        (-0.1, top + 0.2)
    } else {
        let depth = rng.random_range(0.3..0.7) * b.height;
        (b.height - depth, top - (b.height - depth) + 0.1)
    };
    if rng.random_bool(0.5) {
        let r = rng.random_range(0.2..0.45) * hx.min(hy);
        let cx = rng.random_range(-(hx - r)..=(hx - r)) * 0.8;
        let cy = rng.random_range(-(hy - r)..=(hy - r)) * 0.8;
        extrude(circle(cx, cy, r), z, h, Role::Cut)
    } else {
        let w = rng.random_range(0.25..0.5) * 2.0 * hx;
        let d = rng.random_range(0.25..0.5) * 2.0 * hy;
        let cx = rng.random_range(-(hx - w / 2.0)..=(hx - w / 2.0)) * 0.8;
        let cy = rng.random_range(-(hy - d / 2.0)..=(hy - d / 2.0)) * 0.8;
        extrude(rect(cx, cy, w, d), z, h, Role::Cut)
    }
}

/// Random fillets/chamfers on the sharp corners of an extrusion.
fn add_features(rng: &mut ChaCha8Rng, op: &mut Operation) {
    let pts = op.profile.outer.points.clone();
    for i in 0..pts.len() {
        if op.profile.outer.turn_angle(i) < 30f64.to_radians() || !rng.random_bool(0.5) {
            continue;
        }
        let kind = if rng.random_bool(0.5) {
            FeatureKind::Fillet
        } else {
            FeatureKind::Chamfer
        };
        let limit = corner_limit(&pts, i, kind);
        if limit < 0.05 {
            continue;
        }
        let param = rng.random_range(0.3..0.9) * limit.min(0.4);
        op.corner_features.push(CornerFeature {
            corner: i,
            kind,
            param,
        });
    }
}

fn sample(rng: &mut ChaCha8Rng, c: Complexity) -> Program {
    match c {
        Complexity::Easy => {
            let b = base(rng, true);
            let mut ops = vec![b.op.clone()];
            if rng.random_bool(0.5) && !b.round {
                ops.push(boss(rng, &b));
            }
            Program::new(ops)
        }
        Complexity::Medium => {
            let b = base(rng, false);
            let n = rng.random_range(3..=4);
            let mut ops = vec![b.op.clone()];
            let mut top = b.height;
            if n == 4 || rng.random_bool(0.5) {
                let bs = boss(rng, &b);
                if let crate::program::OpKind::Extrude { height } = bs.kind {
                    top = top.max(bs.profile.plane.origin.z + height);
                }
                ops.push(bs);
            }
            while ops.len() < n {
                ops.push(cut(rng, &b, top));
            }
            Program::new(ops)
        }
        Complexity::Hard => {
            let mut b = base(rng, false);
            if !b.round {
                add_features(rng, &mut b.op);
            }
            let n = rng.random_range(5..=6);
            let mut ops = vec![b.op.clone()];
            let mut top = b.height;
            for _ in 0..2 {
                let mut bs = boss(rng, &b);
                add_features(rng, &mut bs);
                if let crate::program::OpKind::Extrude { height } = bs.kind {
                    top = top.max(bs.profile.plane.origin.z + height);
                }
                ops.push(bs);
            }
            while ops.len() < n {
                ops.push(cut(rng, &b, top));
            }
            Program::new(ops)
        }
    }
}

fn contract_holds(p: &Program, c: Complexity) -> bool {
    let cuts = p.ops.iter().filter(|o| o.role == Role::Cut).count();
    let feats = p.ops.iter().any(|o| !o.corner_features.is_empty());
    let n = p.len();
    let shape_ok = match c {
        Complexity::Easy => (1..=2).contains(&n),
        Complexity::Medium => (3..=4).contains(&n) && cuts >= 1,
        Complexity::Hard => (5..=6).contains(&n) && cuts >= 1 && feats,
    };
    shape_ok && p.validate().is_ok() && Solid::new(p.clone()).is_ok_and(|s| !s.bounds().is_empty())
}

/// The `index`-th program of a benchmark set. Deterministic in
/// `(complexity, seed, index)`; independent of the set size.
pub fn random_program(c: Complexity, seed: u64, index: usize) -> Result<Program> {
    let mix = seed ^ (index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut rng = ChaCha8Rng::seed_from_u64(mix);
    for _ in 0..1000 {
        let p = sample(&mut rng, c);
        if contract_holds(&p, c) {
            return Ok(p);
        }
    }
    Err(crate::error::Error::Domain("could not sample a valid program".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contracts_hold() {
        for c in [Complexity::Easy, Complexity::Medium, Complexity::Hard] {
            for i in 0..30 {
                let p = random_program(c, 7, i).unwrap();
                assert!(contract_holds(&p, c), "{c:?} {i}");
            }
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            random_program(Complexity::Hard, 3, 4).unwrap(),
            random_program(Complexity::Hard, 3, 4).unwrap()
        );
    }
}
