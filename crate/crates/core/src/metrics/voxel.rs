use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};

/// Placement of a regular grid of cubic cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec3,
    pub spacing: f64,
    pub dims: [usize; 3],
}

impl GridSpec {
    /// Grid of cubic cells with `resolution` cells along the longest side of
    /// `bounds`, centered on the box.
    pub fn covering(bounds: &Aabb, resolution: usize) -> GridSpec {
        let resolution = resolution.max(1);
        let size = bounds.size();
        let longest = bounds.longest_side().max(1e-12);
        let spacing = longest / resolution as f64;
        let mut dims = [1usize; 3];
        for (a, d) in dims.iter_mut().enumerate() {
            *d = ((size[a] / spacing - 1e-9).ceil() as usize).max(1);
        }
        let extent = Vec3::new(dims[0] as f64, dims[1] as f64, dims[2] as f64) * spacing;
        GridSpec {
            origin: bounds.center() - extent / 2.0,
            spacing,
            dims,
        }
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let r = idx / self.dims[0];
        [i, r % self.dims[1], r / self.dims[1]]
    }

    pub fn cell_center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * self.spacing
    }

    /// Cell containing `p`, if inside the grid.
    pub fn cell_of(&self, p: &Vec3) -> Option<[usize; 3]> {
        let mut c = [0usize; 3];
        for a in 0..3 {
            let t = ((p[a] - self.origin[a]) / self.spacing).floor();
            if !(t >= 0.0 && t < self.dims[a] as f64) {
                return None;
            }
            c[a] = t as usize;
        }
        Some(c)
    }

    pub fn bounds(&self) -> Aabb {
        let extent = Vec3::new(
            self.dims[0] as f64,
            self.dims[1] as f64,
            self.dims[2] as f64,
        ) * self.spacing;
        Aabb::new(self.origin, self.origin + extent)
    }

    /// Half-open index ranges covering every cell whose center lies in `b`,
    /// widened by one cell so rounding never drops a boundary cell.
    pub fn center_range(&self, b: &Aabb) -> [(usize, usize); 3] {
        let mut r = [(0, 0); 3];
        if b.is_empty() {
            return r;
        }
        for a in 0..3 {
            let lo = ((b.min[a] - self.origin[a]) / self.spacing - 0.5).ceil() - 1.0;
            let hi = ((b.max[a] - self.origin[a]) / self.spacing - 0.5).floor() + 2.0;
            let n = self.dims[a] as f64;
            let lo = lo.clamp(0.0, n) as usize;
            let hi = hi.clamp(0.0, n) as usize;
            r[a] = (lo, hi.max(lo));
        }
        r
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(3)
    }
}

/// Packed occupancy bits over a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub spec: GridSpec,
    bits: Vec<u64>,
}

impl VoxelGrid {
    pub fn empty(spec: GridSpec) -> Self {
        VoxelGrid {
            spec,
            bits: vec![0; spec.len().div_ceil(64)],
        }
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(usize) -> bool) -> Self {
        let mut g = VoxelGrid::empty(spec);
        for idx in 0..spec.len() {
            if f(idx) {
                g.set(idx, true);
            }
        }
        g
    }

    pub fn get(&self, idx: usize) -> bool {
        self.bits[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn get3(&self, i: usize, j: usize, k: usize) -> bool {
        self.get(self.spec.index(i, j, k))
    }

    pub fn set(&mut self, idx: usize, value: bool) {
        let m = 1u64 << (idx % 64);
        if value {
            self.bits[idx / 64] |= m;
        } else {
            self.bits[idx / 64] &= !m;
        }
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn volume(&self) -> f64 {
        self.count() as f64 * self.spec.cell_volume()
    }

    pub fn comparable(&self, other: &VoxelGrid) -> bool {
        self.spec == other.spec
    }

    fn zip(&self, other: &VoxelGrid, f: impl Fn(u64, u64) -> u64) -> Result<VoxelGrid> {
        if !self.comparable(other) {
            return Err(Error::IncomparableGrids);
        }
        Ok(VoxelGrid {
            spec: self.spec,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn and(&self, other: &VoxelGrid) -> Result<VoxelGrid> {
        self.zip(other, |a, b| a & b)
    }

    pub fn or(&self, other: &VoxelGrid) -> Result<VoxelGrid> {
        self.zip(other, |a, b| a | b)
    }

    /// Cells in `self` but not in `other`.
    pub fn and_not(&self, other: &VoxelGrid) -> Result<VoxelGrid> {
        self.zip(other, |a, b| a & !b)
    }

    pub fn or_assign(&mut self, other: &VoxelGrid) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn and_not_assign(&mut self, other: &VoxelGrid) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= !b;
        }
    }

    /// Popcount of `self ∧ other` without allocating.
    pub fn and_count(&self, other: &VoxelGrid) -> u64 {
        self.bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }

    pub fn or_count(&self, other: &VoxelGrid) -> u64 {
        self.bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a | b).count_ones() as u64)
            .sum()
    }

    pub fn occupied(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + b)
            })
        })
    }

    /// Bounding box of the occupied cells (cell extents, not centers).
    pub fn occupied_bounds(&self) -> Aabb {
        let mut b = Aabb::empty();
        for idx in self.occupied() {
            let [i, j, k] = self.spec.coords(idx);
            let c = self.spec.cell_center(i, j, k);
            let h = Vec3::repeat(self.spec.spacing / 2.0);
            b.grow(&(c - h));
            b.grow(&(c + h));
        }
        b
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.bits
    }
}

/// Occupancy of every cell whose center satisfies `oracle`.
pub fn voxelize<F>(oracle: F, spec: &GridSpec) -> VoxelGrid
where
    F: Fn(&Vec3) -> bool + Sync,
{
    voxelize_region(oracle, spec, &spec.bounds())
}

/// Like [`voxelize`], evaluating the oracle only for cell centers inside
/// `region`; all other cells are empty.
pub fn voxelize_region<F>(oracle: F, spec: &GridSpec, region: &Aabb) -> VoxelGrid
where
    F: Fn(&Vec3) -> bool + Sync,
{
    let [(i0, i1), (j0, j1), (k0, k1)] = spec.center_range(region);
    let slabs: Vec<Vec<usize>> = (k0..k1)
        .into_par_iter()
        .map(|k| {
            let mut hits = Vec::new();
            for j in j0..j1 {
                for i in i0..i1 {
                    let c = spec.cell_center(i, j, k);
                    if region.contains(&c) && oracle(&c) {
                        hits.push(spec.index(i, j, k));
                    }
                }
            }
            hits
        })
        .collect();
    let mut g = VoxelGrid::empty(*spec);
    for idx in slabs.into_iter().flatten() {
        g.set(idx, true);
    }
    g
}

/// IoU as an exact ratio of cell counts.
/// Comparisons are by value, so `1/2 == 2/4`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Iou {
    pub inter: u64,
    pub union: u64,
}

impl Iou {
    pub fn new(inter: u64, union: u64) -> Self {
        if union == 0 {
            Iou { inter: 1, union: 1 }
        } else {
            Iou { inter, union }
        }
    }

    pub fn zero() -> Self {
        Iou { inter: 0, union: 1 }
    }

    pub fn value(&self) -> f64 {
        self.inter as f64 / self.union as f64
    }
}

impl PartialEq for Iou {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Iou {}

impl PartialOrd for Iou {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Iou {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.inter as u128 * other.union as u128).cmp(&(other.inter as u128 * self.union as u128))
    }
}

/// Exact IoU of two comparable grids.
pub fn iou_exact(a: &VoxelGrid, b: &VoxelGrid) -> Result<Iou> {
    if !a.comparable(b) {
        return Err(Error::IncomparableGrids);
    }
    Ok(Iou::new(a.and_count(b), a.or_count(b)))
}

/// `|A ∧ B| / |A ∨ B|`, defined as 1 when both are empty.
pub fn volumetric_iou(a: &VoxelGrid, b: &VoxelGrid) -> Result<f64> {
    iou_exact(a, b).map(|i| i.value())
}
