use std::collections::HashMap;

use super::{Aabb, Vec3};
use crate::error::{Error, Result};

/// Indexed triangle surface.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(i) = vertices
            .iter()
            .position(|v| v.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
        }
        let n = vertices.len();
        if let Some(i) = faces.iter().position(|f| f.iter().any(|&k| k >= n)) {
            return Err(Error::InvalidMesh(format!(
                "face {i} references a vertex out of range"
            )));
        }
        Ok(TriMesh { vertices, faces })
    }

    /// Builds a mesh from triangle soup, welding vertices closer than `tol`.
    /// Triangles that collapse after welding are dropped.
    pub fn from_triangles(triangles: &[[Vec3; 3]], tol: f64) -> Result<Self> {
        let mut welder = Welder::new(tol);
        let mut faces = Vec::with_capacity(triangles.len());
        for tri in triangles {
            let f = [
                welder.insert(&tri[0]),
                welder.insert(&tri[1]),
                welder.insert(&tri[2]),
            ];
            if f[0] != f[1] && f[1] != f[2] && f[0] != f[2] {
                faces.push(f);
            }
        }
        TriMesh::new(welder.vertices, faces)
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn triangle(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Area-scaled normal (twice the area times the unit normal).
    pub fn face_cross(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.triangle(f);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_cross(f).norm()
    }

    /// Unit face normal; zero for degenerate faces.
    pub fn face_normal(&self, f: usize) -> Vec3 {
        let c = self.face_cross(f);
        let n = c.norm();
        if n > 0.0 {
            c / n
        } else {
            Vec3::zeros()
        }
    }

    pub fn face_centroid(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.triangle(f);
        (a + b + c) / 3.0
    }

    pub fn face_normals(&self) -> Vec<Vec3> {
        (0..self.faces.len()).map(|f| self.face_normal(f)).collect()
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter())
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Enclosed volume by the divergence theorem (positive for outward
    /// orientation).
    pub fn volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|&[a, b, c]| {
                self.vertices[a].dot(&self.vertices[b].cross(&self.vertices[c])) / 6.0
            })
            .sum()
    }

    /// Every undirected edge must be shared by exactly two faces that
    /// traverse it in opposite directions.
    pub fn check_watertight(&self) -> Result<()> {
        if self.faces.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let mut edges: HashMap<(usize, usize), (u32, i32)> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let (key, dir) = if a < b { ((a, b), 1) } else { ((b, a), -1) };
                let e = edges.entry(key).or_insert((0, 0));
                e.0 += 1;
                e.1 += dir;
            }
        }
        let mut boundary = 0usize;
        let mut nonmanifold = 0usize;
        let mut flipped = 0usize;
        for &(count, balance) in edges.values() {
            match count {
                1 => boundary += 1,
                2 if balance != 0 => flipped += 1,
                2 => {}
                _ => nonmanifold += 1,
            }
        }
        if boundary + nonmanifold + flipped > 0 {
            return Err(Error::NotWatertight(format!(
                "{boundary} boundary edges, {nonmanifold} non-manifold edges, \
                 {flipped} inconsistently oriented edges"
            )));
        }
        Ok(())
    }

    pub fn is_watertight(&self) -> bool {
        self.check_watertight().is_ok()
    }

    /// Applies `p ↦ p * scale + translation` to every vertex.
    pub fn transformed(&self, scale: f64, translation: &Vec3) -> TriMesh {
        TriMesh {
            vertices: self
                .vertices
                .iter()
                .map(|v| v * scale + translation)
                .collect(),
            faces: self.faces.clone(),
        }
    }

    pub fn map_vertices(&self, f: impl Fn(&Vec3) -> Vec3) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(f).collect(),
            faces: self.faces.clone(),
        }
    }
}

/// Scales and centers a mesh so that its bounding box is centered at the
/// origin with longest side 2. Returns `(normalized, scale, center)`; the
/// original vertex is `v / scale + center`.
pub fn normalize_mesh(mesh: &TriMesh) -> Result<(TriMesh, f64, Vec3)> {
    if mesh.vertices.is_empty() {
        return Err(Error::DegenerateBounds);
    }
    let b = mesh.bounds();
    let longest = b.longest_side();
    if !(longest > 0.0) || !longest.is_finite() {
        return Err(Error::DegenerateBounds);
    }
    let center = b.center();
    let scale = 2.0 / longest;
    let normalized = mesh.map_vertices(|v| (v - center) * scale);
    Ok((normalized, scale, center))
}

struct Welder {
    tol: f64,
    cells: HashMap<[i64; 3], Vec<usize>>,
    vertices: Vec<Vec3>,
}

impl Welder {
    fn new(tol: f64) -> Self {
        Welder {
            tol: tol.max(f64::MIN_POSITIVE),
            cells: HashMap::new(),
            vertices: Vec::new(),
        }
    }

    fn key(&self, p: &Vec3) -> [i64; 3] {
        [
            (p.x / self.tol).floor() as i64,
            (p.y / self.tol).floor() as i64,
            (p.z / self.tol).floor() as i64,
        ]
    }

    fn insert(&mut self, p: &Vec3) -> usize {
        let k = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.cells.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        for &id in ids {
                            if (self.vertices[id] - p).norm() <= self.tol {
                                return id;
                            }
                        }
                    }
                }
            }
        }
        let id = self.vertices.len();
        self.vertices.push(*p);
        self.cells.entry(k).or_default().push(id);
        id
    }
}

/// Axis-aligned box mesh with outward orientation.
pub fn box_mesh(min: Vec3, max: Vec3) -> TriMesh {
    let v = |i: usize| {
        Vec3::new(
            if i & 1 == 0 { min.x } else { max.x },
            if i & 2 == 0 { min.y } else { max.y },
            if i & 4 == 0 { min.z } else { max.z },
        )
    };
    let vertices = (0..8).map(v).collect();
    let faces = vec![
        [0, 2, 1],
        [1, 2, 3],
        [4, 5, 6],
        [5, 7, 6],
        [0, 1, 4],
        [1, 5, 4],
        [2, 6, 3],
        [3, 6, 7],
        [0, 4, 2],
        [2, 4, 6],
        [1, 3, 5],
        [3, 7, 5],
    ];
    TriMesh { vertices, faces }
}

impl TriMesh {
    pub fn cuboid(min: Vec3, max: Vec3) -> TriMesh {
        box_mesh(min, max)
    }

    /// Concatenates meshes without welding. Reversing a mesh's orientation
    /// (`flip`) turns it into a cavity when nested inside another.
    pub fn merged(parts: &[(&TriMesh, bool)]) -> TriMesh {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for (m, flip) in parts {
            let base = vertices.len();
            vertices.extend_from_slice(&m.vertices);
            faces.extend(m.faces.iter().map(|f| {
                if *flip {
                    [f[0] + base, f[2] + base, f[1] + base]
                } else {
                    [f[0] + base, f[1] + base, f[2] + base]
                }
            }));
        }
        TriMesh { vertices, faces }
    }
}
