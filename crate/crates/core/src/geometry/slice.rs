use std::collections::HashMap;

use super::{Loop3D, Plane, TriMesh};

/// Intersects a mesh with a plane and chains the segments into closed loops.
///
/// Vertices exactly on the plane are classified as lying on the positive
/// side, so every crossing is a proper edge crossing. Segment endpoints are
/// identified by the mesh edge they lie on, which chains a watertight mesh
/// into closed loops without a distance tolerance. Open chains are dropped.
pub fn slice_with_plane(mesh: &TriMesh, plane: &Plane) -> Vec<Loop3D> {
    let dist: Vec<f64> = mesh
        .vertices
        .iter()
        .map(|v| plane.signed_distance(v))
        .collect();
    let above = |i: usize| dist[i] >= 0.0;

    // segments as pairs of edge keys
    let mut segments: Vec<[(usize, usize); 2]> = Vec::new();
    for f in &mesh.faces {
        let mut ends = [(0, 0); 2];
        let mut n = 0;
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            if above(a) != above(b) {
                if n < 2 {
                    ends[n] = if a < b { (a, b) } else { (b, a) };
                }
                n += 1;
            }
        }
        if n == 2 {
            segments.push(ends);
        }
    }
    if segments.is_empty() {
        return Vec::new();
    }

    let mut incident: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (s, ends) in segments.iter().enumerate() {
        for e in ends {
            incident.entry(*e).or_default().push(s);
        }
    }

    let point = |(a, b): (usize, usize)| {
        let (da, db) = (dist[a], dist[b]);
        let t = da / (da - db);
        mesh.vertices[a] + (mesh.vertices[b] - mesh.vertices[a]) * t
    };

    let mut used = vec![false; segments.len()];
    let mut loops = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let first = segments[start][0];
        let mut chain = vec![first];
        let mut current = segments[start][1];
        let mut closed = false;
        loop {
            if current == first {
                closed = true;
                break;
            }
            chain.push(current);
            let next = incident
                .get(&current)
                .and_then(|segs| segs.iter().copied().find(|&s| !used[s]));
            let Some(s) = next else { break };
            used[s] = true;
            current = if segments[s][0] == current {
                segments[s][1]
            } else {
                segments[s][0]
            };
        }
        if !closed {
            continue;
        }
        if let Some(l) = Loop3D::from_points(chain.into_iter().map(point).collect()) {
            loops.push(l);
        }
    }
    loops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use approx::assert_relative_eq;

    fn cube() -> TriMesh {
        TriMesh::cuboid(Vec3::repeat(-0.5), Vec3::repeat(0.5))
    }

    #[test]
    fn cube_mid_section_is_unit_square() {
        let loops = slice_with_plane(&cube(), &Plane::from_normal(Vec3::zeros(), Vec3::z()));
        assert_eq!(loops.len(), 1);
        assert_relative_eq!(loops[0].length(), 4.0, epsilon = 1e-12);
        for p in &loops[0].points {
            assert_relative_eq!(p.z, 0.0);
            assert!(p.x.abs().max(p.y.abs()) > 0.5 - 1e-12);
        }
    }

    #[test]
    fn plane_outside_gives_nothing() {
        let loops = slice_with_plane(&cube(), &Plane::from_normal(Vec3::z() * 2.0, Vec3::z()));
        assert!(loops.is_empty());
    }

    #[test]
    fn plane_through_face_is_closed() {
        let loops = slice_with_plane(&cube(), &Plane::from_normal(Vec3::z() * 0.5, Vec3::z()));
        // the face plane itself: vertices on the plane count as above, so the
        // section degenerates to the lower ring of the top face
        for l in &loops {
            assert!(l.points.len() >= 3);
        }
    }

    #[test]
    fn tube_section_has_two_loops() {
        // square tube built from an outer box and a reversed inner box that
        // pierces through top and bottom is not a valid solid; use a shell
        let outer = TriMesh::cuboid(Vec3::repeat(-1.0), Vec3::repeat(1.0));
        let inner = TriMesh::cuboid(Vec3::repeat(-0.5), Vec3::repeat(0.5));
        let shell = TriMesh::merged(&[(&outer, false), (&inner, true)]);
        let loops = slice_with_plane(&shell, &Plane::from_normal(Vec3::new(0.0, 0.0, 0.1), Vec3::z()));
        assert_eq!(loops.len(), 2);
        let mut lengths: Vec<f64> = loops.iter().map(|l| l.length()).collect();
        lengths.sort_by(f64::total_cmp);
        assert_relative_eq!(lengths[0], 4.0, epsilon = 1e-12);
        assert_relative_eq!(lengths[1], 8.0, epsilon = 1e-12);
    }
}
