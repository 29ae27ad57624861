use super::fit::fit_primitives;
use super::{extract_loops, group_profiles, Loop2D, Profile};
use crate::assembly::FitConfig;
use crate::geometry::PlaneSource;
use crate::metrics::Target;

/// A profile together with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchCandidate {
    pub profile: Profile,
    pub source: PlaneSource,
    /// Index of the sketch plane in proposal order.
    pub plane_index: usize,
    /// Index of the profile among those found on its plane.
    pub profile_index: usize,
    /// Number of fitted primitives over all rings.
    pub elements: usize,
}

/// Replaces a loop by the polygon of its fitted primitive chain, so
/// straight runs become exact segments and corners exact vertices.
fn regularize(lp: &Loop2D, tol: f64) -> (Loop2D, usize) {
    let chain = fit_primitives(lp, tol);
    let poly = chain.to_polygon();
    if poly.len() < 3 {
        return (lp.clone(), chain.elements.len().max(1));
    }
    (Loop2D::new(poly), chain.elements.len())
}

/// An outer loop with no holes that is (nearly) its own bounding
/// rectangle and spans the target's full extent on both plane axes.
fn is_bounding_rectangle(profile: &Profile, target: &dyn Target) -> bool {
    if !profile.holes.is_empty() {
        return false;
    }
    let (lo, hi) = profile.bbox();
    let rect_area = (hi.x - lo.x) * (hi.y - lo.y);
    if rect_area <= 0.0 || profile.outer.signed_area() < 0.98 * rect_area {
        return false;
    }
    let b = target.bounds();
    let tol = 0.02 * b.diagonal();
    let plane = &profile.plane;
    let axes = [plane.u_axis, plane.v_axis()];
    let spans = [(lo.x, hi.x), (lo.y, hi.y)];
    axes.iter().zip(spans).all(|(axis, (a, b_))| {
        let Some(k) = (0..3).find(|&k| (axis[k].abs() - 1.0).abs() < 1e-9) else {
            return false;
        };
        let offset = plane.origin[k] * axis[k];
        let (w0, w1) = {
            let x0 = offset + a * axis[k];
            let x1 = offset + b_ * axis[k];
            (x0.min(x1), x1.max(x0))
        };
        (w0 - b.min[k]).abs() <= tol && (w1 - b.max[k]).abs() <= tol
    })
}

/// Proposes sketch planes on the target, slices it, and turns the sections
/// into regularized profiles. Order is deterministic: by plane, then by
/// profile centroid.
pub fn extract_sketch_candidates(target: &dyn Target, cfg: &FitConfig) -> Vec<SketchCandidate> {
    let mut out = Vec::new();
    for (plane_index, sp) in target.sketch_planes(cfg).iter().enumerate() {
        let sections = target.slice(&sp.slice);
        if sections.is_empty() {
            continue;
        }
        let loops = extract_loops(&sections, &sp.sketch, cfg);
        let mut regular = Vec::with_capacity(loops.len());
        let mut counts = Vec::with_capacity(loops.len());
        for lp in &loops {
            let (r, c) = regularize(lp, cfg.fit_tolerance);
            if r.signed_area().abs() > cfg.min_loop_area {
                regular.push(r);
                counts.push(c);
            }
        }
        let element_count = |l: &Loop2D| -> usize {
            regular
                .iter()
                .position(|r| r.points == l.points || r.reversed().points == l.points)
                .map_or(1, |i| counts[i])
        };
        for (profile_index, profile) in group_profiles(&regular, &sp.sketch).into_iter().enumerate() {
            if sp.source == PlaneSource::Axis && is_bounding_rectangle(&profile, target) {
                continue;
            }
            let elements = profile.rings().map(element_count).sum();
            out.push(SketchCandidate {
                profile,
                source: sp.source,
                plane_index,
                profile_index,
                elements,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{TriMesh, Vec3};
    use crate::metrics::MeshTarget;

    #[test]
    fn cube_has_unit_square_profile() {
        let m = TriMesh::cuboid(Vec3::repeat(-0.5), Vec3::repeat(0.5));
        let t = MeshTarget::new(m, 2000, 0).unwrap();
        let cands = extract_sketch_candidates(&t, &FitConfig::default());
        assert!(cands
            .iter()
            .any(|c| (c.profile.area() - 1.0).abs() < 1e-3 && c.profile.holes.is_empty()));
        // every axis slice of a box is its bounding rectangle
        assert!(cands.iter().all(|c| c.source == PlaneSource::Planar));
        assert!(cands.iter().all(|c| c.elements == 4));
    }

    #[test]
    fn empty_when_slices_miss() {
        struct Nothing(crate::metrics::KdTree);
        impl Target for Nothing {
            fn contains(&self, _: &Vec3) -> bool {
                false
            }
            fn surface_points(&self) -> &[Vec3] {
                &[]
            }
            fn surface_tree(&self) -> &crate::metrics::KdTree {
                &self.0
            }
            fn bounds(&self) -> crate::geometry::Aabb {
                crate::geometry::Aabb::new(Vec3::zeros(), Vec3::repeat(1.0))
            }
            fn slice(&self, _: &crate::geometry::Plane) -> Vec<crate::geometry::Loop3D> {
                Vec::new()
            }
            fn sketch_planes(&self, _: &FitConfig) -> Vec<crate::geometry::SketchPlane> {
                Vec::new()
            }
        }
        let t = Nothing(crate::metrics::KdTree::new(Vec::new()));
        assert!(extract_sketch_candidates(&t, &FitConfig::default()).is_empty());
    }
}
