use serde::{Deserialize, Serialize};

use super::voxel::{Iou, VoxelGrid};
use crate::error::{Error, Result};

/// Under- and over-reconstructed regions of a solid against a target.
#[derive(Debug, Clone)]
pub struct Residuals {
    /// `M ∖ S`
    pub plus: VoxelGrid,
    /// `S ∖ M`
    pub minus: VoxelGrid,
    pub target: VoxelGrid,
    pub solid: VoxelGrid,
    pub counts: ResidualCounts,
}

/// Integer cell counts behind the normalized residual volumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualCounts {
    pub target: u64,
    pub plus: u64,
    pub minus: u64,
}

impl ResidualCounts {
    /// `|R⁺| / |M|`
    pub fn a(&self) -> f64 {
        self.plus as f64 / self.target as f64
    }

    /// `|R⁻| / |M|`
    pub fn b(&self) -> f64 {
        self.minus as f64 / self.target as f64
    }

    /// `(1 − a) / (1 + b)` as an exact count ratio: `(|M| − |R⁺|) / (|M| + |R⁻|)`.
    pub fn iou(&self) -> Iou {
        Iou::new(self.target - self.plus, self.target + self.minus)
    }

    /// `1 − IoU ≤ a + b`, checked in integers:
    /// `(u − i)·m ≤ (p + q)·u` with `u = m + q`, `i = m − p`.
    pub fn bound_holds(&self) -> bool {
        let iou = self.iou();
        let lhs = (iou.union - iou.inter) as u128 * self.target as u128;
        let rhs = (self.plus + self.minus) as u128 * iou.union as u128;
        lhs <= rhs
    }
}

pub fn compute_residuals(target: &VoxelGrid, solid: &VoxelGrid) -> Result<Residuals> {
    if !target.comparable(solid) {
        return Err(Error::IncomparableGrids);
    }
    let t = target.count();
    if t == 0 {
        return Err(Error::EmptyTarget);
    }
    let plus = target.and_not(solid)?;
    let minus = solid.and_not(target)?;
    let counts = ResidualCounts {
        target: t,
        plus: plus.count(),
        minus: minus.count(),
    };
    Ok(Residuals {
        plus,
        minus,
        target: target.clone(),
        solid: solid.clone(),
        counts,
    })
}

impl Residuals {
    pub fn a(&self) -> f64 {
        self.counts.a()
    }

    pub fn b(&self) -> f64 {
        self.counts.b()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorDecomposition {
    #[serde(rename = "E")]
    pub e: f64,
    pub iou: f64,
    pub bound_ok: bool,
}

/// `E = a + b`, `IoU = (1 − a)/(1 + b)` and the bound `1 − IoU ≤ E`.
pub fn error_decomposition(a: f64, b: f64) -> Result<ErrorDecomposition> {
    if !(0.0..=1.0).contains(&a) || !(b >= 0.0 && b.is_finite()) {
        return Err(Error::Domain(format!(
            "expected 0 <= a <= 1 and b >= 0, got a={a}, b={b}"
        )));
    }
    let e = a + b;
    let iou = (1.0 - a) / (1.0 + b);
    Ok(ErrorDecomposition {
        e,
        iou,
        bound_ok: 1.0 - iou <= e + 1e-12,
    })
}
