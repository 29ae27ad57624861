//! Point-in-mesh by parity of crossings along a +z ray.
//!
//! Rays that hit an edge or vertex exactly are resolved by symbolically
//! perturbing the query point by `(ε, ε²)` in the xy plane. Edge orientation
//! is always evaluated with the endpoints in lexicographic order, so the two
//! triangles sharing an edge see the same floating-point value and the
//! perturbation assigns the hit to exactly one of them.

use super::{Aabb, TriMesh, Vec2, Vec3};

/// Sign of the orientation of `p` relative to the directed edge `a → b`,
/// never zero unless the edge is degenerate in xy.
fn edge_side(a: &Vec2, b: &Vec2, p: &Vec2) -> i8 {
    let swapped = (b.x, b.y) < (a.x, a.y);
    let (s, t) = if swapped { (b, a) } else { (a, b) };
    let d = t - s;
    let o = d.x * (p.y - s.y) - d.y * (p.x - s.x);
    let sign = if o > 0.0 {
        1
    } else if o < 0.0 {
        -1
    } else if d.y != 0.0 {
        // perturbation p + (ε, ε²): o ≈ d.x ε² − d.y ε
        if d.y < 0.0 {
            1
        } else {
            -1
        }
    } else if d.x != 0.0 {
        if d.x > 0.0 {
            1
        } else {
            -1
        }
    } else {
        0
    };
    if swapped {
        -sign
    } else {
        sign
    }
}

/// Height at which the vertical line through `(x, y)` crosses triangle
/// `tri`, if it does (under the symbolic perturbation rule).
pub(crate) fn vertical_crossing(tri: &[Vec3; 3], x: f64, y: f64) -> Option<f64> {
    let p = Vec2::new(x, y);
    let a = tri[0].xy();
    let b = tri[1].xy();
    let c = tri[2].xy();
    let s0 = edge_side(&a, &b, &p);
    if s0 == 0 {
        return None;
    }
    let s1 = edge_side(&b, &c, &p);
    if s1 != s0 {
        return None;
    }
    let s2 = edge_side(&c, &a, &p);
    if s2 != s0 {
        return None;
    }
    // barycentric interpolation of z
    let det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    if det == 0.0 {
        return None;
    }
    let l1 = ((p.x - a.x) * (c.y - a.y) - (c.x - a.x) * (p.y - a.y)) / det;
    let l2 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
    Some(tri[0].z + l1 * (tri[1].z - tri[0].z) + l2 * (tri[2].z - tri[0].z))
}

/// Brute-force parity test against every triangle.
pub fn point_in_mesh(mesh: &TriMesh, p: &Vec3) -> bool {
    let mut inside = false;
    for f in 0..mesh.faces.len() {
        if let Some(z) = vertical_crossing(&mesh.triangle(f), p.x, p.y) {
            if z > p.z {
                inside = !inside;
            }
        }
    }
    inside
}

/// Triangles binned on a uniform xy grid for fast vertical-ray queries.
#[derive(Debug, Clone)]
pub struct MeshIndex {
    triangles: Vec<[Vec3; 3]>,
    bounds: Aabb,
    nx: usize,
    ny: usize,
    cell: Vec2,
    bins: Vec<Vec<u32>>,
}

impl MeshIndex {
    pub fn new(mesh: &TriMesh) -> Self {
        let triangles: Vec<[Vec3; 3]> = (0..mesh.faces.len()).map(|f| mesh.triangle(f)).collect();
        let bounds = mesh.bounds();
        let side = ((triangles.len() as f64).sqrt() * 0.5).ceil().clamp(1.0, 256.0) as usize;
        let size = bounds.size();
        let (nx, ny) = (side, side);
        let cell = Vec2::new(
            (size.x / nx as f64).max(1e-12),
            (size.y / ny as f64).max(1e-12),
        );
        let mut index = MeshIndex {
            triangles,
            bounds,
            nx,
            ny,
            cell,
            bins: vec![Vec::new(); nx * ny],
        };
        for (t, tri) in index.triangles.iter().enumerate() {
            let lo = tri[0].inf(&tri[1]).inf(&tri[2]);
            let hi = tri[0].sup(&tri[1]).sup(&tri[2]);
            let (i0, j0) = index.bin_of(lo.x, lo.y);
            let (i1, j1) = index.bin_of(hi.x, hi.y);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    index.bins[j * nx + i].push(t as u32);
                }
            }
        }
        index
    }

    fn bin_of(&self, x: f64, y: f64) -> (usize, usize) {
        let i = ((x - self.bounds.min.x) / self.cell.x).floor();
        let j = ((y - self.bounds.min.y) / self.cell.y).floor();
        (
            (i.max(0.0) as usize).min(self.nx - 1),
            (j.max(0.0) as usize).min(self.ny - 1),
        )
    }

    pub fn bounds(&self) -> Aabb {
        self.bounds
    }

    /// Sorted heights at which the vertical line through `(x, y)` crosses
    /// the surface.
    pub fn column_crossings(&self, x: f64, y: f64) -> Vec<f64> {
        if x < self.bounds.min.x
            || x > self.bounds.max.x
            || y < self.bounds.min.y
            || y > self.bounds.max.y
        {
            return Vec::new();
        }
        let (i, j) = self.bin_of(x, y);
        let mut zs: Vec<f64> = self.bins[j * self.nx + i]
            .iter()
            .filter_map(|&t| vertical_crossing(&self.triangles[t as usize], x, y))
            .collect();
        zs.sort_by(f64::total_cmp);
        zs
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        if !self.bounds.contains(p) {
            return false;
        }
        let above = self
            .column_crossings(p.x, p.y)
            .iter()
            .filter(|&&z| z > p.z)
            .count();
        above % 2 == 1
    }
}
