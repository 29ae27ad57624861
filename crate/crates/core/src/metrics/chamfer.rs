use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::KdTree;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChamferMode {
    /// Half the sum of both directed mean (unsquared) distances.
    Symmetric,
    /// Mean squared distance from `P` to its nearest neighbour in `Q`.
    OneSided,
}

/// Nearest-neighbour distances (squared) from each query point into `tree`,
/// in query order.
pub fn nearest_sq_distances(query: &[Vec3], tree: &KdTree) -> Vec<f64> {
    query.par_iter().map(|q| tree.nearest_dist2(q)).collect()
}

/// Mean squared distance from `query` to `tree`; summed sequentially so the
/// result does not depend on thread scheduling.
pub fn one_sided_to(query: &[Vec3], tree: &KdTree) -> f64 {
    let d = nearest_sq_distances(query, tree);
    d.iter().sum::<f64>() / d.len() as f64
}

/// Mean unsquared distance from `query` to `tree`.
pub fn mean_distance_to(query: &[Vec3], tree: &KdTree) -> f64 {
    let d = nearest_sq_distances(query, tree);
    d.iter().map(|x| x.sqrt()).sum::<f64>() / d.len() as f64
}

pub fn chamfer_distance(p: &[Vec3], q: &[Vec3], mode: ChamferMode) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let tq = KdTree::new(q.to_vec());
    Ok(match mode {
        ChamferMode::OneSided => one_sided_to(p, &tq),
        ChamferMode::Symmetric => {
            let tp = KdTree::new(p.to_vec());
            0.5 * (mean_distance_to(p, &tq) + mean_distance_to(q, &tp))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_grid(z: f64, n: usize) -> Vec<Vec3> {
        let mut v = Vec::new();
        for i in 0..n {
            for j in 0..n {
                v.push(Vec3::new(
                    (i as f64 + 0.5) / n as f64,
                    (j as f64 + 0.5) / n as f64,
                    z,
                ));
            }
        }
        v
    }

    #[test]
    fn self_distance_is_zero() {
        let p = square_grid(0.0, 10);
        assert_eq!(chamfer_distance(&p, &p, ChamferMode::Symmetric).unwrap(), 0.0);
        assert_eq!(chamfer_distance(&p, &p, ChamferMode::OneSided).unwrap(), 0.0);
    }

    #[test]
    fn parallel_squares() {
        let p = square_grid(0.0, 60);
        let q = square_grid(0.1, 60);
        let s = chamfer_distance(&p, &q, ChamferMode::Symmetric).unwrap();
        let o = chamfer_distance(&p, &q, ChamferMode::OneSided).unwrap();
        assert!((s - 0.1).abs() < 1e-3, "{s}");
        assert!((o - 0.01).abs() < 2e-4, "{o}");
    }

    #[test]
    fn singletons() {
        let p = [Vec3::zeros()];
        let q = [Vec3::new(2.0, 0.0, 0.0)];
        assert_eq!(chamfer_distance(&p, &q, ChamferMode::Symmetric).unwrap(), 2.0);
        assert_eq!(chamfer_distance(&p, &q, ChamferMode::OneSided).unwrap(), 4.0);
    }

    #[test]
    fn empty_errors() {
        assert!(matches!(
            chamfer_distance(&[], &[Vec3::zeros()], ChamferMode::Symmetric),
            Err(Error::EmptyCloud)
        ));
    }
}
