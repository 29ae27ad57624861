use std::collections::HashMap;

use super::voxel::{voxelize, GridSpec, VoxelGrid};
use super::KdTree;
use crate::assembly::FitConfig;
use crate::error::{Error, Result};
use crate::geometry::{
    propose_sketch_planes, sample_surface, slice_with_plane, Aabb, Loop3D, MeshIndex, Plane,
    SketchPlane, TriMesh, Vec2, Vec3,
};
use crate::program::isosurface;

/// Something to fit: a membership oracle, a surface point cloud, bounds,
/// a plane slicer and a source of sketch planes.
pub trait Target: Send + Sync {
    fn contains(&self, p: &Vec3) -> bool;
    fn surface_points(&self) -> &[Vec3];
    /// Nearest-neighbour index over [`Target::surface_points`].
    fn surface_tree(&self) -> &KdTree;
    fn bounds(&self) -> Aabb;
    fn slice(&self, plane: &Plane) -> Vec<Loop3D>;
    fn sketch_planes(&self, cfg: &FitConfig) -> Vec<SketchPlane>;

    fn voxelize(&self, spec: &GridSpec) -> VoxelGrid {
        voxelize(|p| self.contains(p), spec)
    }
}

/// A watertight triangle mesh as a fitting target.
#[derive(Debug, Clone)]
pub struct MeshTarget {
    mesh: TriMesh,
    index: MeshIndex,
    tree: KdTree,
}

impl MeshTarget {
    /// `n_samples` surface points drawn with `seed`.
    pub fn new(mesh: TriMesh, n_samples: usize, seed: u64) -> Result<Self> {
        mesh.check_watertight()?;
        let points = sample_surface(&mesh, n_samples.max(1), seed);
        Ok(MeshTarget {
            index: MeshIndex::new(&mesh),
            tree: KdTree::new(points),
            mesh,
        })
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }
}

impl Target for MeshTarget {
    fn contains(&self, p: &Vec3) -> bool {
        self.index.contains(p)
    }

    fn surface_points(&self) -> &[Vec3] {
        self.tree.points()
    }

    fn surface_tree(&self) -> &KdTree {
        &self.tree
    }

    fn bounds(&self) -> Aabb {
        self.mesh.bounds()
    }

    fn slice(&self, plane: &Plane) -> Vec<Loop3D> {
        slice_with_plane(&self.mesh, plane)
    }

    fn sketch_planes(&self, cfg: &FitConfig) -> Vec<SketchPlane> {
        propose_sketch_planes(&self.mesh, cfg)
    }

    /// One crossing query per grid column; identical to evaluating
    /// [`MeshTarget::contains`] at every cell center.
    fn voxelize(&self, spec: &GridSpec) -> VoxelGrid {
        use rayon::prelude::*;
        let [nx, ny, nz] = spec.dims;
        let b = self.mesh.bounds();
        let columns: Vec<Vec<usize>> = (0..nx * ny)
            .into_par_iter()
            .map(|c| {
                let (i, j) = (c % nx, c / nx);
                let base = spec.cell_center(i, j, 0);
                let zs = self.index.column_crossings(base.x, base.y);
                let mut hits = Vec::new();
                if zs.is_empty() {
                    return hits;
                }
                for k in 0..nz {
                    let p = spec.cell_center(i, j, k);
                    if !b.contains(&p) {
                        continue;
                    }
                    let above = zs.len() - zs.partition_point(|&z| z <= p.z);
                    if above % 2 == 1 {
                        hits.push(spec.index(i, j, k));
                    }
                }
                hits
            })
            .collect();
        let mut g = VoxelGrid::empty(*spec);
        for idx in columns.into_iter().flatten() {
            g.set(idx, true);
        }
        g
    }
}

/// A voxel region (typically a residual) as a fitting target.
#[derive(Debug, Clone)]
pub struct GridTarget {
    grid: VoxelGrid,
    bounds: Aabb,
    tree: KdTree,
    mesh: Option<TriMesh>,
}

/// Target over the occupied cells of `residual`: nearest-cell membership,
/// boundary-cell centers as surface points and marching-squares slicing.
pub fn residual_target(residual: &VoxelGrid) -> Result<GridTarget> {
    if residual.is_empty() {
        return Err(Error::EmptyResidual);
    }
    let spec = residual.spec;
    let [nx, ny, nz] = spec.dims;
    let filled = |i: isize, j: isize, k: isize| {
        i >= 0
            && j >= 0
            && k >= 0
            && (i as usize) < nx
            && (j as usize) < ny
            && (k as usize) < nz
            && residual.get3(i as usize, j as usize, k as usize)
    };
    let mut points = Vec::new();
    for idx in residual.occupied() {
        let [i, j, k] = spec.coords(idx);
        let (i, j, k) = (i as isize, j as isize, k as isize);
        let boundary = [
            (1, 0, 0),
            (-1, 0, 0),
            (0, 1, 0),
            (0, -1, 0),
            (0, 0, 1),
            (0, 0, -1),
        ]
        .iter()
        .any(|(a, b, c)| !filled(i + a, j + b, k + c));
        if boundary {
            points.push(spec.cell_center(i as usize, j as usize, k as usize));
        }
    }
    let mut target = GridTarget {
        bounds: residual.occupied_bounds().inflate(spec.spacing),
        grid: residual.clone(),
        tree: KdTree::new(points),
        mesh: None,
    };
    // a surface mesh of the indicator, used for planar-cluster proposals
    let mut lattice = spec;
    lattice.origin -= Vec3::repeat(2.0 * spec.spacing);
    lattice.dims = [nx + 4, ny + 4, nz + 4];
    target.mesh = isosurface(|p| target.contains(p), &lattice).ok();
    Ok(target)
}

impl GridTarget {
    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    pub fn mesh(&self) -> Option<&TriMesh> {
        self.mesh.as_ref()
    }
}

impl Target for GridTarget {
    fn contains(&self, p: &Vec3) -> bool {
        self.bounds.contains(p)
            && self
                .grid
                .spec
                .cell_of(p)
                .is_some_and(|[i, j, k]| self.grid.get3(i, j, k))
    }

    fn surface_points(&self) -> &[Vec3] {
        self.tree.points()
    }

    fn surface_tree(&self) -> &KdTree {
        &self.tree
    }

    fn bounds(&self) -> Aabb {
        self.bounds
    }

    fn slice(&self, plane: &Plane) -> Vec<Loop3D> {
        contour_plane(|p| self.contains(p), &self.bounds, plane, self.grid.spec.spacing / 2.0)
    }

    fn sketch_planes(&self, cfg: &FitConfig) -> Vec<SketchPlane> {
        self.mesh
            .as_ref()
            .map(|m| propose_sketch_planes(m, cfg))
            .unwrap_or_default()
    }

    fn voxelize(&self, spec: &GridSpec) -> VoxelGrid {
        if *spec == self.grid.spec {
            self.grid.clone()
        } else {
            voxelize(|p| self.contains(p), spec)
        }
    }
}

/// Marching-squares contour of `inside` on `plane`, sampled on a lattice of
/// spacing `step` covering `bounds`. Crossings are located by bisection
/// along lattice edges, so the loops follow the oracle's true boundary.
pub fn contour_plane<F>(inside: F, bounds: &Aabb, plane: &Plane, step: f64) -> Vec<Loop3D>
where
    F: Fn(&Vec3) -> bool,
{
    let mut lo = Vec2::repeat(f64::INFINITY);
    let mut hi = Vec2::repeat(f64::NEG_INFINITY);
    for c in 0..8 {
        let p = Vec3::new(
            if c & 1 == 0 { bounds.min.x } else { bounds.max.x },
            if c & 2 == 0 { bounds.min.y } else { bounds.max.y },
            if c & 4 == 0 { bounds.min.z } else { bounds.max.z },
        );
        let uv = plane.to_local(&p);
        lo = lo.inf(&uv);
        hi = hi.sup(&uv);
    }
    lo -= Vec2::repeat(2.0 * step);
    hi += Vec2::repeat(2.0 * step);
    let nu = ((hi.x - lo.x) / step).ceil() as usize + 1;
    let nv = ((hi.y - lo.y) / step).ceil() as usize + 1;
    let node = |i: usize, j: usize| lo + Vec2::new(i as f64, j as f64) * step;
    let mut val = vec![false; nu * nv];
    for j in 1..nv - 1 {
        for i in 1..nu - 1 {
            val[j * nu + i] = inside(&plane.to_world(&node(i, j)));
        }
    }

    // segments between active lattice edges, keyed by node pairs
    type Key = (usize, usize);
    let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    let mut segments: Vec<[Key; 2]> = Vec::new();
    for j in 0..nv - 1 {
        for i in 0..nu - 1 {
            let n00 = j * nu + i;
            let n10 = n00 + 1;
            let n01 = n00 + nu;
            let n11 = n01 + 1;
            let edges = [key(n00, n10), key(n10, n11), key(n01, n11), key(n00, n01)];
            let active: Vec<Key> = edges
                .iter()
                .copied()
                .filter(|&(a, b)| val[a] != val[b])
                .collect();
            match active.len() {
                2 => segments.push([active[0], active[1]]),
                4 => {
                    if val[n00] {
                        segments.push([edges[0], edges[3]]);
                        segments.push([edges[1], edges[2]]);
                    } else {
                        segments.push([edges[0], edges[1]]);
                        segments.push([edges[2], edges[3]]);
                    }
                }
                _ => {}
            }
        }
    }

    let mut by_key: HashMap<Key, Vec<usize>> = HashMap::new();
    for (s, seg) in segments.iter().enumerate() {
        for k in seg {
            by_key.entry(*k).or_default().push(s);
        }
    }
    let locate = |(a, b): Key| {
        let (pa, pb) = (node(a % nu, a / nu), node(b % nu, b / nu));
        let (mut tin, mut tout) = if val[a] { (pa, pb) } else { (pb, pa) };
        for _ in 0..12 {
            let m = (tin + tout) / 2.0;
            if inside(&plane.to_world(&m)) {
                tin = m;
            } else {
                tout = m;
            }
        }
        plane.to_world(&((tin + tout) / 2.0))
    };

    let mut used = vec![false; segments.len()];
    let mut loops = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let first = segments[start][0];
        let mut keys = vec![first];
        let mut cur = segments[start][1];
        let mut closed = false;
        loop {
            if cur == first {
                closed = true;
                break;
            }
            keys.push(cur);
            let next = by_key
                .get(&cur)
                .and_then(|v| v.iter().copied().find(|&s| !used[s]));
            let Some(s) = next else { break };
            used[s] = true;
            cur = if segments[s][0] == cur {
                segments[s][1]
            } else {
                segments[s][0]
            };
        }
        if closed {
            if let Some(l) = Loop3D::from_points(keys.into_iter().map(locate).collect()) {
                loops.push(l);
            }
        }
    }
    loops
}
