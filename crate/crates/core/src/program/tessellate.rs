//! Surface extraction by marching tetrahedra.
//!
//! Each lattice cube is split into six tetrahedra sharing the diagonal from
//! its lowest to its highest corner, so neighbouring cubes agree on every
//! shared face and the surface is closed. Vertices are placed on lattice
//! edges by bisection of the membership oracle.

use std::collections::HashMap;

use super::solid::Solid;
use crate::error::{Error, Result};
use crate::geometry::{TriMesh, Vec3};
use crate::metrics::{voxelize, GridSpec};

const BISECTION_STEPS: usize = 10;

/// The six tetrahedra of the cube, as corner bitmasks (bit 0 = +x, bit 1 =
/// +y, bit 2 = +z), one per axis permutation.
const TETS: [[u8; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

/// Closed surface separating cell centers of `lattice` where `inside`
/// holds from those where it does not. Lattice border nodes must be
/// outside for the result to be watertight.
pub fn isosurface<F>(inside: F, lattice: &GridSpec) -> Result<TriMesh>
where
    F: Fn(&Vec3) -> bool + Sync,
{
    let field = voxelize(&inside, lattice);
    if field.is_empty() {
        return Err(Error::EmptySolid);
    }
    let [nx, ny, nz] = lattice.dims;
    let node = |i: usize, j: usize, k: usize| lattice.index(i, j, k);
    let pos = |idx: usize| {
        let [i, j, k] = lattice.coords(idx);
        lattice.cell_center(i, j, k)
    };

    let mut vertices: Vec<Vec3> = Vec::new();
    let mut edge_vertex: HashMap<(usize, usize), usize> = HashMap::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut vertex_on = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
        let key = if a < b { (a, b) } else { (b, a) };
        *edge_vertex.entry(key).or_insert_with(|| {
            let (mut pin, mut pout) = if field.get(a) { (pos(a), pos(b)) } else { (pos(b), pos(a)) };
            for _ in 0..BISECTION_STEPS {
                let m = (pin + pout) / 2.0;
                if inside(&m) {
                    pin = m;
                } else {
                    pout = m;
                }
            }
            vertices.push((pin + pout) / 2.0);
            vertices.len() - 1
        })
    };

    for k in 0..nz.saturating_sub(1) {
        for j in 0..ny.saturating_sub(1) {
            for i in 0..nx.saturating_sub(1) {
                let corners: [usize; 8] =
                    std::array::from_fn(|c| node(i + (c & 1), j + (c >> 1 & 1), k + (c >> 2 & 1)));
                let mask = corners.iter().filter(|&&c| field.get(c)).count();
                if mask == 0 || mask == 8 {
                    continue;
                }
                for tet in TETS {
                    let v: [usize; 4] = tet.map(|c| corners[c as usize]);
                    let ins: Vec<usize> = v.iter().copied().filter(|&n| field.get(n)).collect();
                    let outs: Vec<usize> = v.iter().copied().filter(|&n| !field.get(n)).collect();
                    if ins.is_empty() || outs.is_empty() {
                        continue;
                    }
                    let cin = ins.iter().map(|&n| pos(n)).sum::<Vec3>() / ins.len() as f64;
                    let cout = outs.iter().map(|&n| pos(n)).sum::<Vec3>() / outs.len() as f64;
                    let dir = cout - cin;
                    let tris: Vec<[usize; 3]> = match (ins.len(), outs.len()) {
                        (1, 3) => vec![[
                            vertex_on(ins[0], outs[0], &mut vertices),
                            vertex_on(ins[0], outs[1], &mut vertices),
                            vertex_on(ins[0], outs[2], &mut vertices),
                        ]],
                        (3, 1) => vec![[
                            vertex_on(ins[0], outs[0], &mut vertices),
                            vertex_on(ins[1], outs[0], &mut vertices),
                            vertex_on(ins[2], outs[0], &mut vertices),
                        ]],
                        _ => {
                            // quad a0-b0, a0-b1, a1-b1, a1-b0 in cyclic order
                            let q = [
                                vertex_on(ins[0], outs[0], &mut vertices),
                                vertex_on(ins[0], outs[1], &mut vertices),
                                vertex_on(ins[1], outs[1], &mut vertices),
                                vertex_on(ins[1], outs[0], &mut vertices),
                            ];
                            vec![[q[0], q[1], q[2]], [q[0], q[2], q[3]]]
                        }
                    };
                    for mut t in tris {
                        let n = (vertices[t[1]] - vertices[t[0]]).cross(&(vertices[t[2]] - vertices[t[0]]));
                        if n.dot(&dir) < 0.0 {
                            t.swap(1, 2);
                        }
                        faces.push(t);
                    }
                }
            }
        }
    }
    TriMesh::new(vertices, faces)
}

/// Watertight surface of `solid` on a lattice with `resolution` cells along
/// the longest side of its bounds, padded by two cells on every side.
pub fn tessellate_solid(solid: &Solid, resolution: usize) -> Result<TriMesh> {
    if resolution < 16 {
        return Err(Error::Domain(format!("resolution must be >= 16, got {resolution}")));
    }
    let b = solid.bounds();
    if b.is_empty() {
        return Err(Error::EmptySolid);
    }
    let mut spec = GridSpec::covering(&b, resolution);
    spec.origin -= Vec3::repeat(2.0 * spec.spacing);
    spec.dims = spec.dims.map(|d| d + 4);
    isosurface(|p| solid.contains(p), &spec)
}
