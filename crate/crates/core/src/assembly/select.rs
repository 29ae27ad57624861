//! IoU-guided greedy selection and backward pruning over precomputed
//! operation masks.

use crate::error::Result;
use crate::metrics::{Iou, VoxelGrid};
use crate::program::Role;

/// Folds per-operation masks with union and cut, in order.
pub fn compose(masks: &[&VoxelGrid], roles: &[Role], spec_of: &VoxelGrid) -> VoxelGrid {
    let mut g = VoxelGrid::empty(spec_of.spec);
    for (m, role) in masks.iter().zip(roles) {
        match role {
            Role::Union => g.or_assign(m),
            Role::Cut => g.and_not_assign(m),
        }
    }
    g
}

/// IoU of `goal` against `cur ∪ m`, without materializing the union.
fn union_iou(goal: &VoxelGrid, cur: &VoxelGrid, m: &VoxelGrid) -> Iou {
    let (g, c, m) = (goal.words(), cur.words(), m.words());
    let (mut inter, mut union) = (0u64, 0u64);
    for k in 0..g.len() {
        let s = c[k] | m[k];
        inter += (g[k] & s).count_ones() as u64;
        union += (g[k] | s).count_ones() as u64;
    }
    Iou::new(inter, union)
}

/// Result of greedy selection.
#[derive(Debug, Clone, Default)]
pub struct Selection {
    /// Chosen mask indices, in the order they were added.
    pub chosen: Vec<usize>,
    /// IoU after each addition.
    pub trace: Vec<f64>,
}

/// Greedy union-only selection: repeatedly adds the mask giving the highest
/// IoU with `goal`, as long as the IoU strictly improves. Ties go to the
/// lower index. Empty masks and exact duplicates of an earlier mask are
/// never chosen.
pub fn greedy_select(masks: &[VoxelGrid], goal: &VoxelGrid) -> Result<Selection> {
    use rayon::prelude::*;
    for m in masks {
        if !m.comparable(goal) {
            return Err(crate::error::Error::IncomparableGrids);
        }
    }
    let mut usable: Vec<usize> = Vec::new();
    for (i, m) in masks.iter().enumerate() {
        if m.is_empty() || m.and_count(goal) == 0 {
            continue;
        }
        if usable.iter().any(|&j| masks[j] == *m) {
            continue;
        }
        usable.push(i);
    }

    let mut sel = Selection::default();
    let mut cur = VoxelGrid::empty(goal.spec);
    let mut best = Iou::new(0, goal.count());
    loop {
        let pick = usable
            .par_iter()
            .filter(|i| !sel.chosen.contains(i))
            .map(|&i| (union_iou(goal, &cur, &masks[i]), i))
            .reduce_with(|a, b| match a.0.cmp(&b.0) {
                std::cmp::Ordering::Greater => a,
                std::cmp::Ordering::Less => b,
                std::cmp::Ordering::Equal => {
                    if a.1 < b.1 {
                        a
                    } else {
                        b
                    }
                }
            });
        match pick {
            Some((iou, i)) if iou > best => {
                best = iou;
                cur.or_assign(&masks[i]);
                sel.chosen.push(i);
                sel.trace.push(iou.value());
            }
            _ => break,
        }
    }
    Ok(sel)
}

/// Drops a run of leading cuts; cutting from nothing is a no-op, so the
/// composed mask is unchanged.
pub fn strip_leading_cuts(keep: &mut Vec<usize>, roles: &[Role]) {
    let lead = keep.iter().take_while(|&&i| roles[i] == Role::Cut).count();
    keep.drain(..lead);
}

/// Backward pruning. While some single removal keeps the IoU at or above
/// the current value, removes the one with the highest resulting IoU (ties
/// go to the larger index). Returns the surviving indices in order.
pub fn backward_prune(masks: &[VoxelGrid], roles: &[Role], goal: &VoxelGrid) -> Result<Vec<usize>> {
    use rayon::prelude::*;
    let iou_of = |keep: &[usize]| -> Result<Iou> {
        let ms: Vec<&VoxelGrid> = keep.iter().map(|&i| &masks[i]).collect();
        let rs: Vec<Role> = keep.iter().map(|&i| roles[i]).collect();
        let g = compose(&ms, &rs, goal);
        crate::metrics::iou_exact(&g, goal)
    };
    let mut keep: Vec<usize> = (0..masks.len()).collect();
    strip_leading_cuts(&mut keep, roles);
    let mut cur = iou_of(&keep)?;
    while !keep.is_empty() {
        let trials: Vec<(Iou, usize)> = (0..keep.len())
            .into_par_iter()
            .map(|pos| {
                let mut k = keep.clone();
                k.remove(pos);
                strip_leading_cuts(&mut k, roles);
                iou_of(&k).map(|v| (v, pos))
            })
            .collect::<Result<_>>()?;
        // highest IoU, larger position on ties
        let best = trials
            .into_iter()
            .max_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        match best {
            Some((iou, pos)) if iou >= cur => {
                keep.remove(pos);
                strip_leading_cuts(&mut keep, roles);
                cur = iou;
            }
            _ => break,
        }
    }
    Ok(keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Aabb, Vec3};
    use crate::metrics::GridSpec;

    fn spec() -> GridSpec {
        GridSpec::covering(&Aabb::new(Vec3::zeros(), Vec3::repeat(1.0)), 8)
    }

    fn boxed(lo: [usize; 3], hi: [usize; 3]) -> VoxelGrid {
        let s = spec();
        VoxelGrid::from_fn(s, |idx| {
            let c = s.coords(idx);
            (0..3).all(|a| c[a] >= lo[a] && c[a] < hi[a])
        })
    }

    #[test]
    fn greedy_picks_exact_match_first() {
        let goal = boxed([0, 0, 0], [4, 8, 8]);
        let masks = vec![boxed([0, 0, 0], [2, 8, 8]), goal.clone(), boxed([0, 0, 0], [8, 8, 8])];
        let sel = greedy_select(&masks, &goal).unwrap();
        assert_eq!(sel.chosen, vec![1]);
        assert_eq!(sel.trace, vec![1.0]);
    }

    #[test]
    fn greedy_builds_union_of_halves() {
        let goal = boxed([0, 0, 0], [8, 8, 4]);
        let masks = vec![boxed([0, 0, 0], [4, 8, 4]), boxed([4, 0, 0], [8, 8, 4]), boxed([0, 0, 0], [4, 8, 4])];
        let sel = greedy_select(&masks, &goal).unwrap();
        assert_eq!(sel.chosen, vec![0, 1]);
        assert_eq!(sel.trace, vec![0.5, 1.0]);
    }

    #[test]
    fn prune_removes_redundant_union() {
        let goal = boxed([0, 0, 0], [8, 8, 4]);
        let masks = vec![boxed([0, 0, 0], [8, 8, 4]), boxed([0, 0, 0], [4, 4, 4])];
        let keep = backward_prune(&masks, &[Role::Union, Role::Union], &goal).unwrap();
        assert_eq!(keep, vec![0]);
    }

    #[test]
    fn prune_keeps_useful_cut() {
        let goal = boxed([0, 0, 0], [4, 8, 8]);
        let masks = vec![boxed([0, 0, 0], [8, 8, 8]), boxed([4, 0, 0], [8, 8, 8])];
        let keep = backward_prune(&masks, &[Role::Union, Role::Cut], &goal).unwrap();
        assert_eq!(keep, vec![0, 1]);
    }

    #[test]
    fn leading_cut_stripped() {
        let mut keep = vec![1, 2, 0];
        strip_leading_cuts(&mut keep, &[Role::Union, Role::Cut, Role::Cut]);
        assert_eq!(keep, vec![0]);
    }
}
