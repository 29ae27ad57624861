//! Candidate sketch planes: offset planes around planar face clusters plus
//! axis-aligned slices at interior quantiles of the extent.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Plane, TriMesh, Vec3};
use crate::assembly::{FitConfig, SketchSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneSource {
    Planar,
    Axis,
}

/// A plane to slice the target with, and the plane its sections are
/// projected onto.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchPlane {
    pub sketch: Plane,
    pub slice: Plane,
    pub source: PlaneSource,
}

#[derive(Debug, Clone)]
pub(crate) struct Cluster {
    pub origin: Vec3,
    pub normal: Vec3,
    pub area: f64,
    /// Member face indices, sorted.
    #[cfg_attr(not(test), allow(dead_code))]
    pub faces: Vec<usize>,
}

/// Greedy grouping of faces into near-coplanar clusters, seeded by the
/// largest unassigned face. Faces join a seed when their normal is within
/// `angle_deg` and their centroid within `offset_tol` of the seed plane.
pub(crate) fn planar_clusters(mesh: &TriMesh, angle_deg: f64, offset_tol: f64) -> Vec<Cluster> {
    let nf = mesh.faces.len();
    let normals = mesh.face_normals();
    let areas: Vec<f64> = (0..nf).map(|f| mesh.face_area(f)).collect();
    let centroids: Vec<Vec3> = (0..nf).map(|f| mesh.face_centroid(f)).collect();
    let cos_tol = angle_deg.to_radians().cos();
    let q = angle_deg.to_radians().sin().max(1e-3);
    let key = |n: &Vec3| {
        [
            (n.x / q).round() as i32,
            (n.y / q).round() as i32,
            (n.z / q).round() as i32,
        ]
    };

    let mut bins: HashMap<[i32; 3], Vec<usize>> = HashMap::new();
    for f in 0..nf {
        if areas[f] > 0.0 {
            bins.entry(key(&normals[f])).or_default().push(f);
        }
    }
    let mut order: Vec<usize> = (0..nf).filter(|&f| areas[f] > 0.0).collect();
    order.sort_by(|&a, &b| areas[b].total_cmp(&areas[a]).then(a.cmp(&b)));

    let mut assigned = vec![false; nf];
    let mut clusters = Vec::new();
    for &seed in &order {
        if assigned[seed] {
            continue;
        }
        let n0 = normals[seed];
        let d0 = n0.dot(&centroids[seed]);
        let k = key(&n0);
        let mut members = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(bin) = bins.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) else {
                        continue;
                    };
                    for &f in bin {
                        if !assigned[f]
                            && normals[f].dot(&n0) >= cos_tol
                            && (n0.dot(&centroids[f]) - d0).abs() <= offset_tol
                        {
                            assigned[f] = true;
                            members.push(f);
                        }
                    }
                }
            }
        }
        if !assigned[seed] {
            assigned[seed] = true;
            members.push(seed);
        }
        members.sort_unstable();
        let area: f64 = members.iter().map(|&f| areas[f]).sum();
        let mut normal = Vec3::zeros();
        let mut origin = Vec3::zeros();
        for &f in &members {
            normal += normals[f] * areas[f];
            origin += centroids[f] * areas[f];
        }
        clusters.push(Cluster {
            origin: origin / area,
            normal: normal.normalize(),
            area,
            faces: members,
        });
    }
    clusters
}

fn is_duplicate(planes: &[SketchPlane], p: &Plane, cos_tol: f64) -> bool {
    planes.iter().any(|q| {
        q.slice.normal.dot(&p.normal) >= cos_tol
            && (q.slice.normal.dot(&q.slice.origin) - p.normal.dot(&p.origin)).abs() < 1e-4
    })
}

/// Proposes sketch planes for a (normalized) mesh.
pub fn propose_sketch_planes(mesh: &TriMesh, cfg: &FitConfig) -> Vec<SketchPlane> {
    let cos_tol = cfg.cluster_angle_deg.to_radians().cos();
    let mut planes: Vec<SketchPlane> = Vec::new();

    if cfg.sketch_source != SketchSource::Axis {
        let total = mesh.surface_area();
        let clusters = planar_clusters(mesh, cfg.cluster_angle_deg, cfg.cluster_offset_tol);
        for c in clusters
            .iter()
            .filter(|c| c.area >= cfg.min_cluster_area * total)
        {
            let sketch = Plane::from_normal(c.origin, c.normal);
            for sign in [1.0, -1.0] {
                let slice = sketch.offset(sign * cfg.slice_offset);
                if !is_duplicate(&planes, &slice, cos_tol) {
                    planes.push(SketchPlane {
                        sketch,
                        slice,
                        source: PlaneSource::Planar,
                    });
                }
            }
        }
    }

    if cfg.sketch_source != SketchSource::Planar {
        let b = mesh.bounds();
        for axis in 0..3 {
            let mut normal = Vec3::zeros();
            normal[axis] = 1.0;
            let mut u = Vec3::zeros();
            u[(axis + 1) % 3] = 1.0;
            for i in 1..=cfg.n_slices {
                let q = i as f64 / (cfg.n_slices + 1) as f64;
                let mut origin = b.center();
                origin[axis] = b.min[axis] + q * (b.max[axis] - b.min[axis]);
                let mut plane = Plane::new(origin, normal, u);
                if has_coplanar_face(mesh, &plane) {
                    plane = plane.offset(1e-5);
                }
                if !is_duplicate(&planes, &plane, cos_tol) {
                    planes.push(SketchPlane {
                        sketch: plane,
                        slice: plane,
                        source: PlaneSource::Axis,
                    });
                }
            }
        }
    }
    planes
}

fn has_coplanar_face(mesh: &TriMesh, plane: &Plane) -> bool {
    mesh.faces.iter().any(|f| {
        f.iter()
            .all(|&v| plane.signed_distance(&mesh.vertices[v]).abs() < 1e-9)
    })
}
