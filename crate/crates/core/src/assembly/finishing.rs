//! Recovery of fillets and chamfers on sharp extrusion corners.

use serde::{Deserialize, Serialize};

use super::select::compose;
use super::FitConfig;
use crate::error::Result;
use crate::geometry::Aabb;
use crate::metrics::{golden_section_max, iou_exact, voxelize_region, Iou, VoxelGrid};
use crate::program::{corner_limit, CornerFeature, FeatureKind, OpKind, Operation, Primitive, Role};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinishingEvent {
    pub op: usize,
    pub corner: usize,
    pub kind: FeatureKind,
    pub param: f64,
    pub iou_before: f64,
    pub iou_after: f64,
}

struct Ctx<'a> {
    ops: &'a [Operation],
    masks: &'a [VoxelGrid],
    roles: Vec<Role>,
    goal: &'a VoxelGrid,
}

impl Ctx<'_> {
    fn iou_with(&self, i: usize, mask: &VoxelGrid) -> Result<Iou> {
        let ms: Vec<&VoxelGrid> = (0..self.masks.len())
            .map(|k| if k == i { mask } else { &self.masks[k] })
            .collect();
        iou_exact(&compose(&ms, &self.roles, self.goal), self.goal)
    }

    /// Mask of op `i` with one extra feature, recomputed only inside
    /// `region` (the feature cannot change membership elsewhere).
    fn mask_with(&self, i: usize, feat: CornerFeature, region: &Aabb) -> Option<(Operation, VoxelGrid)> {
        let mut op = self.ops[i].clone();
        op.corner_features.push(feat);
        let prim = Primitive::new(&op).ok()?;
        let spec = self.goal.spec;
        let mut m = self.masks[i].clone();
        m.and_not_assign(&voxelize_region(|_| true, &spec, region));
        m.or_assign(&prim.voxelize_region(&spec, region));
        Some((op, m))
    }
}

/// World box around the triangle (prev, corner, next) swept over the
/// extrusion height, padded by one cell.
fn corner_region(op: &Operation, corner: usize, height: f64, pad: f64) -> Aabb {
    let pts = &op.profile.outer.points;
    let n = pts.len();
    let plane = &op.profile.plane;
    let mut b = Aabb::empty();
    for k in [(corner + n - 1) % n, corner, (corner + 1) % n] {
        b.grow(&plane.to_world(&pts[k]));
        b.grow(&plane.to_world_lifted(&pts[k], height));
    }
    b.inflate(pad)
}

/// Tries a fillet and a chamfer on every corner of every extrusion whose
/// turn exceeds `cfg.finishing_min_turn_deg`. A corner is explored only if
/// the probe parameter already helps; the parameter is then refined by a
/// golden-section search over `(0, limit]` and the feature is kept only on
/// strict IoU improvement.
pub fn recover_finishing(
    ops: &mut [Operation],
    masks: &mut [VoxelGrid],
    goal: &VoxelGrid,
    cfg: &FitConfig,
) -> Result<Vec<FinishingEvent>> {
    let min_turn = cfg.finishing_min_turn_deg.to_radians();
    let pad = goal.spec.spacing;
    let mut events = Vec::new();
    let roles: Vec<Role> = ops.iter().map(|o| o.role).collect();
    let mut cur = iou_exact(&compose(&masks.iter().collect::<Vec<_>>(), &roles, goal), goal)?;

    for i in 0..ops.len() {
        let OpKind::Extrude { height } = ops[i].kind else {
            continue;
        };
        let n = ops[i].profile.outer.len();
        for corner in 0..n {
            if ops[i].corner_features.iter().any(|f| f.corner == corner)
                || ops[i].profile.outer.turn_angle(corner) <= min_turn
            {
                continue;
            }
            let region = corner_region(&ops[i], corner, height, pad);
            let mut best: Option<(Iou, Operation, VoxelGrid, CornerFeature)> = None;
            {
                let ctx = Ctx {
                    ops,
                    masks,
                    roles: roles.clone(),
                    goal,
                };
                for kind in [FeatureKind::Fillet, FeatureKind::Chamfer] {
                    let limit = corner_limit(&ops[i].profile.outer.points, corner, kind);
                    if !(limit > 0.0) {
                        continue;
                    }
                    let eval = |param: f64| -> Option<(Iou, Operation, VoxelGrid, CornerFeature)> {
                        let feat = CornerFeature { corner, kind, param };
                        let (op, m) = ctx.mask_with(i, feat, &region)?;
                        let iou = ctx.iou_with(i, &m).ok()?;
                        Some((iou, op, m, feat))
                    };
                    let probe = cfg.finishing_probe.min(limit);
                    let Some(first) = eval(probe) else { continue };
                    if first.0 <= cur {
                        continue;
                    }
                    let (x, _) = golden_section_max(
                        |p| eval(p).map(|r| r.0.value()).unwrap_or(0.0),
                        0.0,
                        limit,
                        cfg.finishing_evals,
                    );
                    let mut local = first;
                    if x > 0.0 && x <= limit {
                        if let Some(r) = eval(x) {
                            if r.0 > local.0 {
                                local = r;
                            }
                        }
                    }
                    if best.as_ref().is_none_or(|b| local.0 > b.0) {
                        best = Some(local);
                    }
                }
            }
            if let Some((iou, op, m, feat)) = best {
                if iou > cur {
                    events.push(FinishingEvent {
                        op: i,
                        corner,
                        kind: feat.kind,
                        param: feat.param,
                        iou_before: cur.value(),
                        iou_after: iou.value(),
                    });
                    ops[i] = op;
                    masks[i] = m;
                    cur = iou;
                }
            }
        }
    }
    Ok(events)
}
