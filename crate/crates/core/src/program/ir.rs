use serde::{Deserialize, Serialize};

use super::corner::{apply_corner_feature, corner_limit};
use crate::error::{Error, Result};
use crate::geometry::{Plane, Vec2, Vec3};
use crate::sketch::{Loop2D, Profile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Union,
    Cut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Fillet,
    Chamfer,
}

/// A fillet (radius) or chamfer (setback) on a vertex of the outer loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerFeature {
    pub corner: usize,
    pub kind: FeatureKind,
    pub param: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpKind {
    /// Sweep along the plane normal from the plane origin.
    Extrude { height: f64 },
    /// Full turn about an axis given in plane coordinates.
    Revolve { axis_point: Vec2, axis_dir: Vec2 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operation {
    pub kind: OpKind,
    pub profile: Profile,
    pub role: Role,
    pub corner_features: Vec<CornerFeature>,
}

/// Slack allowed when checking that a revolve profile stays on the left
/// of its axis.
pub const HALF_PLANE_TOL: f64 = 1e-6;

impl Operation {
    pub fn extrude(profile: Profile, height: f64, role: Role) -> Self {
        Operation {
            kind: OpKind::Extrude { height },
            profile,
            role,
            corner_features: Vec::new(),
        }
    }

    pub fn revolve(profile: Profile, axis_point: Vec2, axis_dir: Vec2, role: Role) -> Self {
        Operation {
            kind: OpKind::Revolve {
                axis_point,
                axis_dir,
            },
            profile,
            role,
            corner_features: Vec::new(),
        }
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    /// The profile with all corner features applied. Features are applied
    /// from the highest corner index down so lower indices stay valid.
    pub fn effective_profile(&self) -> Result<Profile> {
        let mut feats = self.corner_features.clone();
        feats.sort_by(|a, b| b.corner.cmp(&a.corner));
        let mut profile = self.profile.clone();
        for f in feats {
            profile = apply_corner_feature(&profile, f.corner, f.kind, f.param)?;
        }
        Ok(profile)
    }

    /// Checks the operation invariants; `path` prefixes error locations.
    pub fn validate(&self, path: &str) -> Result<()> {
        let err = |field: &str, msg: String| Err(Error::invalid_program(format!("{path}.{field}"), msg));
        let pl = &self.profile.plane;
        if !pl.is_valid(1e-9) {
            return err("plane", "normal and u_axis must be orthonormal".into());
        }
        let finite = |pts: &[Vec2]| pts.iter().all(|p| p.x.is_finite() && p.y.is_finite());
        if self.profile.outer.len() < 3 || !finite(&self.profile.outer.points) {
            return err("profile.outer", "needs at least 3 finite points".into());
        }
        if self.profile.outer.signed_area() <= 0.0 {
            return err("profile.outer", "must enclose positive area".into());
        }
        for (k, h) in self.profile.holes.iter().enumerate() {
            if h.len() < 3 || !finite(&h.points) {
                return err(&format!("profile.holes[{k}]"), "needs at least 3 finite points".into());
            }
            if !h.points.iter().all(|p| self.profile.outer.contains(p)) {
                return err(&format!("profile.holes[{k}]"), "must lie inside the outer loop".into());
            }
        }
        match self.kind {
            OpKind::Extrude { height } => {
                if !(height > 0.0 && height.is_finite()) {
                    return err("height", format!("must be > 0, got {height}"));
                }
            }
            OpKind::Revolve {
                axis_point,
                axis_dir,
            } => {
                if !((axis_dir.norm() - 1.0).abs() <= 1e-9) || !axis_point.iter().all(|x| x.is_finite()) {
                    return err("axis", "dir must be a unit vector and point finite".into());
                }
                if !profile_left_of_axis(&self.profile, axis_point, axis_dir) {
                    return err("axis", "profile must lie on one side of the axis".into());
                }
                if !self.corner_features.is_empty() {
                    return err("corner_features", "only extrusions carry corner features".into());
                }
            }
        }
        let n = self.profile.outer.len();
        let mut seen = Vec::new();
        for (k, f) in self.corner_features.iter().enumerate() {
            let at = format!("corner_features[{k}]");
            if f.corner >= n {
                return err(&at, format!("corner {} out of range (outer has {n} points)", f.corner));
            }
            if seen.contains(&f.corner) {
                return err(&at, format!("corner {} has two features", f.corner));
            }
            seen.push(f.corner);
            let limit = corner_limit(&self.profile.outer.points, f.corner, f.kind);
            if !(f.param > 0.0 && f.param <= limit) {
                return err(&at, format!("param must be in (0, {limit}], got {}", f.param));
            }
        }
        Ok(())
    }
}

/// Every profile vertex satisfies `cross(dir, q − point) ≥ −tol`.
pub fn profile_left_of_axis(profile: &Profile, point: Vec2, dir: Vec2) -> bool {
    profile.rings().all(|r| {
        r.points.iter().all(|q| {
            let d = q - point;
            dir.x * d.y - dir.y * d.x >= -HALF_PLANE_TOL
        })
    })
}

/// Ordered operations folded with union and cut.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub ops: Vec<Operation>,
}

impl Program {
    pub fn new(ops: Vec<Operation>) -> Self {
        Program { ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(first) = self.ops.first() {
            if first.role != Role::Union {
                return Err(Error::invalid_program("ops[0].role", "first operation must be a union"));
            }
        }
        for (i, op) in self.ops.iter().enumerate() {
            op.validate(&format!("ops[{i}]"))?;
        }
        Ok(())
    }

    /// The program without operation `i`; a leading cut left behind is
    /// kept since cutting nothing is a no-op.
    pub fn without(&self, i: usize) -> Program {
        let mut ops = self.ops.clone();
        ops.remove(i);
        Program { ops }
    }

    /// The program under the similarity `x ↦ scale·x + translation`.
    pub fn transformed(&self, scale: f64, translation: &Vec3) -> Program {
        let ops = self
            .ops
            .iter()
            .map(|op| {
                let scale_loop = |l: &Loop2D| Loop2D::new(l.points.iter().map(|p| p * scale).collect());
                let pl = op.profile.plane;
                let profile = Profile {
                    plane: Plane::new(pl.origin * scale + translation, pl.normal, pl.u_axis),
                    outer: scale_loop(&op.profile.outer),
                    holes: op.profile.holes.iter().map(scale_loop).collect(),
                };
                let kind = match op.kind {
                    OpKind::Extrude { height } => OpKind::Extrude {
                        height: height * scale,
                    },
                    OpKind::Revolve {
                        axis_point,
                        axis_dir,
                    } => OpKind::Revolve {
                        axis_point: axis_point * scale,
                        axis_dir,
                    },
                };
                Operation {
                    kind,
                    profile,
                    role: op.role,
                    corner_features: op
                        .corner_features
                        .iter()
                        .map(|f| CornerFeature {
                            param: f.param * scale,
                            ..*f
                        })
                        .collect(),
                }
            })
            .collect();
        Program { ops }
    }
}
