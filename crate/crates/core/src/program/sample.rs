use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ir::OpKind;
use crate::geometry::{Vec2, Vec3};
use crate::sketch::{PolygonIndex, Profile};

/// Surface points of a candidate primitive plus its exact surface area.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSample {
    pub points: Vec<Vec3>,
    pub area: f64,
}

/// Uniform points in the profile region (holes excluded) by rejection
/// sampling in its bounding box.
pub fn sample_region(profile: &Profile, index: &PolygonIndex, n: usize, rng: &mut impl Rng) -> Vec<Vec2> {
    let (lo, hi) = profile.bbox();
    let mut out = Vec::with_capacity(n);
    let mut tries = 0usize;
    while out.len() < n && tries < 1000 * n.max(1) {
        tries += 1;
        let q = Vec2::new(
            lo.x + rng.random::<f64>() * (hi.x - lo.x),
            lo.y + rng.random::<f64>() * (hi.y - lo.y),
        );
        if index.contains(&q) {
            out.push(q);
        }
    }
    out
}

/// Boundary edges of all rings with cumulative lengths for arc-length
/// sampling.
pub struct Boundary {
    edges: Vec<(Vec2, Vec2)>,
    cum: Vec<f64>,
}

impl Boundary {
    pub fn new(profile: &Profile) -> Self {
        Self::weighted(profile, |_, _| 1.0)
    }

    /// Edges weighted by `len · weight(a, b)`.
    pub fn weighted(profile: &Profile, weight: impl Fn(&Vec2, &Vec2) -> f64) -> Self {
        let mut edges = Vec::new();
        let mut cum = Vec::new();
        let mut total = 0.0;
        for r in profile.rings() {
            let n = r.points.len();
            for i in 0..n {
                let (a, b) = (r.points[i], r.points[(i + 1) % n]);
                total += (b - a).norm() * weight(&a, &b);
                edges.push((a, b));
                cum.push(total);
            }
        }
        Boundary { edges, cum }
    }

    pub fn total(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    /// Point at parameter `s ∈ [0, 1)` of the (weighted) boundary length.
    pub fn at(&self, s: f64) -> Vec2 {
        let target = s * self.total();
        let e = self.cum.partition_point(|&c| c <= target).min(self.edges.len() - 1);
        let start = if e == 0 { 0.0 } else { self.cum[e - 1] };
        let len = self.cum[e] - start;
        let t = if len > 0.0 { (target - start) / len } else { 0.0 };
        let (a, b) = self.edges[e];
        a + (b - a) * t
    }
}

/// Area-weighted surface samples of the primitive obtained by applying
/// `kind` to `profile`. Extrusions split `n` between the two caps and the
/// wall in proportion to their areas; revolutions sample the lathe surface
/// by boundary arc length (weighted by radius) and rotation angle.
pub fn sample_candidate_surface(profile: &Profile, kind: &OpKind, n: usize, seed: u64) -> SurfaceSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plane = &profile.plane;
    match *kind {
        OpKind::Extrude { height } => {
            let a = profile.area();
            let boundary = Boundary::new(profile);
            let wall = boundary.total() * height;
            let area = 2.0 * a + wall;
            let n_cap = ((n as f64 * a / area).round() as usize).min(n / 2);
            let n_wall = n - 2 * n_cap;
            let index = profile.index();
            let cap = sample_region(profile, &index, n_cap, &mut rng);
            let mut points = Vec::with_capacity(n);
            points.extend(cap.iter().map(|q| plane.to_world(q)));
            points.extend(cap.iter().map(|q| plane.to_world_lifted(q, height)));
            for _ in 0..n_wall {
                let s = rng.random::<f64>();
                let t = rng.random::<f64>();
                points.push(plane.to_world_lifted(&boundary.at(s), t * height));
            }
            SurfaceSample { points, area }
        }
        OpKind::Revolve {
            axis_point,
            axis_dir,
        } => {
            let radius = |q: &Vec2| {
                let d = q - axis_point;
                (axis_dir.x * d.y - axis_dir.y * d.x).max(0.0)
            };
            let boundary = Boundary::weighted(profile, |a, b| 0.5 * (radius(a) + radius(b)));
            let area = TAU * boundary.total();
            let origin = plane.to_world(&axis_point);
            let axis = plane.u_axis * axis_dir.x + plane.v_axis() * axis_dir.y;
            let side = plane.u_axis * -axis_dir.y + plane.v_axis() * axis_dir.x;
            let third = axis.cross(&side);
            let points = (0..n)
                .map(|_| {
                    let q = boundary.at(rng.random::<f64>());
                    let theta = rng.random::<f64>() * TAU;
                    let along = (q - axis_point).dot(&axis_dir);
                    let r = radius(&q);
                    origin + axis * along + (side * theta.cos() + third * theta.sin()) * r
                })
                .collect();
            SurfaceSample { points, area }
        }
    }
}
