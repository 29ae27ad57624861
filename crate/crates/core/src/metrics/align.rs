use nalgebra::Rotation3;
use serde::{Deserialize, Serialize};

use super::chamfer::mean_distance_to;
use super::KdTree;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// `x ↦ s·R·x + t` with `R = Rz·Ry·Rx` built from Euler angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub rotation: [f64; 3],
    pub translation: Vec3,
    pub scale: f64,
}

impl Default for Similarity {
    fn default() -> Self {
        Similarity {
            rotation: [0.0; 3],
            translation: Vec3::zeros(),
            scale: 1.0,
        }
    }
}

impl Similarity {
    fn matrix(&self) -> Rotation3<f64> {
        Rotation3::from_euler_angles(self.rotation[0], self.rotation[1], self.rotation[2])
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.matrix() * p * self.scale + self.translation
    }

    pub fn apply_inverse(&self, p: &Vec3) -> Vec3 {
        self.matrix().inverse() * ((p - self.translation) / self.scale)
    }

    pub fn apply_all(&self, pts: &[Vec3]) -> Vec<Vec3> {
        let r = self.matrix();
        pts.iter()
            .map(|p| r * p * self.scale + self.translation)
            .collect()
    }

    fn params(&self) -> [f64; 7] {
        let [a, b, c] = self.rotation;
        let t = self.translation;
        [a, b, c, t.x, t.y, t.z, self.scale.ln()]
    }

    fn from_params(x: &[f64; 7]) -> Self {
        Similarity {
            rotation: [x[0], x[1], x[2]],
            translation: Vec3::new(x[3], x[4], x[5]),
            scale: x[6].exp(),
        }
    }
}

/// Outcome of [`align_similarity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    /// Maps the predicted cloud onto the ground truth.
    pub similarity: Similarity,
    /// Symmetric CD at the starting transform: the better of the identity
    /// and the centroid/scale pre-alignment.
    pub initial_cd: f64,
    /// Symmetric CD at the returned transform (on the working subsample).
    pub final_cd: f64,
    pub iterations: usize,
}

const MAX_POINTS: usize = 2048;
const MAX_ITERS: usize = 50;
const CONVERGED: f64 = 1e-5;
const LINE_EVALS: usize = 14;

fn subsample(pts: &[Vec3]) -> Vec<Vec3> {
    let stride = pts.len().div_ceil(MAX_POINTS).max(1);
    pts.iter().step_by(stride).copied().collect()
}

fn centroid_and_rms(pts: &[Vec3]) -> (Vec3, f64) {
    let c = pts.iter().sum::<Vec3>() / pts.len() as f64;
    let rms = (pts.iter().map(|p| (p - c).norm_squared()).sum::<f64>() / pts.len() as f64).sqrt();
    (c, rms)
}

/// Symmetric CD between `T(pred)` and `gt` with both kd-trees built once:
/// distances from `T(p)` use the gt tree, distances from gt points are
/// measured as `s · |T⁻¹(y) − p|` using the pred tree.
struct Objective<'a> {
    pred: &'a [Vec3],
    gt: &'a [Vec3],
    pred_tree: KdTree,
    gt_tree: KdTree,
}

impl Objective<'_> {
    fn eval(&self, t: &Similarity) -> f64 {
        let moved = t.apply_all(self.pred);
        let back: Vec<Vec3> = self.gt.iter().map(|y| t.apply_inverse(y)).collect();
        0.5 * (mean_distance_to(&moved, &self.gt_tree)
            + t.scale * mean_distance_to(&back, &self.pred_tree))
    }
}

/// Aligns `pred` to `gt` by a similarity transform minimizing symmetric
/// Chamfer distance: identity or centroid/RMS pre-alignment, whichever is
/// better, followed by cyclic coordinate descent with golden-section line
/// searches.
pub fn align_similarity(pred: &[Vec3], gt: &[Vec3]) -> Result<Alignment> {
    if pred.len() < 100 || gt.len() < 100 {
        return Err(Error::Domain(format!(
            "alignment needs at least 100 points per cloud (got {} and {})",
            pred.len(),
            gt.len()
        )));
    }
    let pred = subsample(pred);
    let gt = subsample(gt);
    let (cp, rp) = centroid_and_rms(&pred);
    let (cg, rg) = centroid_and_rms(&gt);
    if rp < 1e-12 || rg < 1e-12 {
        return Err(Error::DegenerateCloud);
    }
    let scale = rg / rp;
    let init = Similarity {
        rotation: [0.0; 3],
        translation: cg - cp * scale,
        scale,
    };
    let obj = Objective {
        pred_tree: KdTree::new(pred.clone()),
        gt_tree: KdTree::new(gt.clone()),
        pred: &pred,
        gt: &gt,
    };

    // never start worse than leaving the prediction where it is
    let identity = Similarity::default();
    let (start, initial_cd) = {
        let (fi, fc) = (obj.eval(&identity), obj.eval(&init));
        if fi <= fc {
            (identity, fi)
        } else {
            (init, fc)
        }
    };
    let mut x = start.params();
    let mut f = initial_cd;
    let mut width = [0.3, 0.3, 0.3, 0.2 * rg, 0.2 * rg, 0.2 * rg, 0.2];
    let mut iterations = 0;
    for _ in 0..MAX_ITERS {
        iterations += 1;
        let before = f;
        for i in 0..7 {
            let eval = |v: f64| {
                let mut y = x;
                y[i] = v;
                obj.eval(&Similarity::from_params(&y))
            };
            let (v, fv) = golden_section(eval, x[i] - width[i], x[i] + width[i], LINE_EVALS);
            if fv < f {
                x[i] = v;
                f = fv;
            }
        }
        if before - f < CONVERGED {
            if width[3] < 1e-4 * rg {
                break;
            }
            width.iter_mut().for_each(|w| *w *= 0.5);
        }
    }
    Ok(Alignment {
        similarity: Similarity::from_params(&x),
        initial_cd,
        final_cd: f,
        iterations,
    })
}

/// Minimizes `f` on `[a, b]` with `evals` evaluations; returns the best
/// evaluated point.
pub fn golden_section(f: impl Fn(f64) -> f64, a: f64, b: f64, evals: usize) -> (f64, f64) {
    minimize_golden(f, a, b, evals)
}

/// Maximizing variant of [`golden_section`].
pub fn golden_section_max(f: impl Fn(f64) -> f64, a: f64, b: f64, evals: usize) -> (f64, f64) {
    let (x, v) = minimize_golden(|t| -f(t), a, b, evals);
    (x, -v)
}

fn minimize_golden(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    evals: usize,
) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for _ in 2..evals.max(2) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
            if fd < best.1 {
                best = (d, fd);
            }
        }
    }
    best
}
