//! Sketch profiles: projection and resampling of section loops, grouping by
//! containment, and fitting of line/arc/circle primitives.

mod extract;
mod fit;
mod polygon;

pub use extract::{extract_sketch_candidates, SketchCandidate};
pub use fit::{arc_sweep, chain_deviation, fit_primitives, Primitive, PrimitiveChain};
pub use polygon::{resample_closed, signed_area, Loop2D, PolygonIndex};

use crate::assembly::FitConfig;
use crate::geometry::{Loop3D, Plane, Vec2};

/// One outer loop (counter-clockwise) with its holes (clockwise) on a plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub plane: Plane,
    pub outer: Loop2D,
    pub holes: Vec<Loop2D>,
}

impl Profile {
    /// Builds a profile, fixing loop orientations.
    pub fn new(plane: Plane, outer: Loop2D, holes: Vec<Loop2D>) -> Self {
        Profile {
            plane,
            outer: outer.oriented(true),
            holes: holes.into_iter().map(|h| h.oriented(false)).collect(),
        }
    }

    pub fn rings(&self) -> impl Iterator<Item = &Loop2D> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    /// Net enclosed area (outer minus holes).
    pub fn area(&self) -> f64 {
        self.rings().map(|l| l.signed_area()).sum()
    }

    /// Total boundary length, holes included.
    pub fn perimeter(&self) -> f64 {
        self.rings().map(|l| l.perimeter()).sum()
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        self.outer.contains(p) && !self.holes.iter().any(|h| h.contains(p))
    }

    pub fn bbox(&self) -> (Vec2, Vec2) {
        self.outer.bbox()
    }

    pub fn index(&self) -> PolygonIndex {
        PolygonIndex::new(self.rings().map(|l| l.points.as_slice()))
    }

    /// Checks the containment and orientation invariants.
    pub fn is_valid(&self) -> bool {
        self.outer.len() >= 3
            && self.outer.signed_area() > 0.0
            && self.holes.iter().all(|h| {
                h.len() >= 3
                    && h.signed_area() < 0.0
                    && h.points.iter().all(|p| self.outer.contains(p))
            })
    }
}

/// Projects 3D section loops onto `plane`, resamples each to
/// `cfg.loop_resample_n` points and drops loops below the area or length
/// thresholds.
pub fn extract_loops(sections: &[Loop3D], plane: &Plane, cfg: &FitConfig) -> Vec<Loop2D> {
    sections
        .iter()
        .filter_map(|l| {
            let projected: Vec<Vec2> = l.points.iter().map(|p| plane.to_local(p)).collect();
            let projected = start_at_lowest(projected);
            let pts = resample_closed(&projected, cfg.loop_resample_n, CORNER_KEEP_DEG);
            let lp = Loop2D::new(pts);
            (lp.len() >= 3
                && lp.signed_area().abs() > cfg.min_loop_area
                && lp.perimeter() > cfg.min_loop_length)
                .then_some(lp)
        })
        .collect()
}

/// Sharp vertices above this exterior turn survive resampling exactly.
const CORNER_KEEP_DEG: f64 = 20.0;

fn start_at_lowest(mut pts: Vec<Vec2>) -> Vec<Vec2> {
    if let Some(k) = (0..pts.len()).min_by(|&a, &b| {
        (pts[a].x, pts[a].y)
            .partial_cmp(&(pts[b].x, pts[b].y))
            .unwrap_or(std::cmp::Ordering::Equal)
    }) {
        pts.rotate_left(k);
    }
    pts
}

/// Groups coplanar loops into profiles by even-odd containment depth:
/// even-depth loops are outers, each odd-depth loop becomes a hole of its
/// immediate parent. Output is sorted by outer centroid.
pub fn group_profiles(loops: &[Loop2D], plane: &Plane) -> Vec<Profile> {
    let n = loops.len();
    // contains[i][j]: loop i contains every vertex of loop j
    let contains = |i: usize, j: usize| {
        i != j
            && loops[i].signed_area().abs() > loops[j].signed_area().abs()
            && loops[j].points.iter().all(|p| loops[i].contains(p))
    };
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        for i in 0..n {
            if contains(i, j) {
                parents[j].push(i);
            }
        }
    }
    let depth: Vec<usize> = parents.iter().map(|p| p.len()).collect();
    let mut profiles: Vec<(usize, Vec<usize>)> = (0..n)
        .filter(|&i| depth[i] % 2 == 0)
        .map(|i| (i, Vec::new()))
        .collect();
    for j in (0..n).filter(|&j| depth[j] % 2 == 1) {
        let parent = parents[j]
            .iter()
            .copied()
            .filter(|&i| depth[i] + 1 == depth[j])
            .next();
        if let Some(p) = parent {
            if let Some(entry) = profiles.iter_mut().find(|(o, _)| *o == p) {
                entry.1.push(j);
            }
        }
    }
    let mut out: Vec<Profile> = profiles
        .into_iter()
        .map(|(o, holes)| {
            Profile::new(
                *plane,
                loops[o].clone(),
                holes.into_iter().map(|h| loops[h].clone()).collect(),
            )
        })
        .collect();
    out.sort_by(|a, b| {
        let (ca, cb) = (a.outer.centroid(), b.outer.centroid());
        (ca.x, ca.y)
            .partial_cmp(&(cb.x, cb.y))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}
