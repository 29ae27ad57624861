//! Property tests against independent oracles.

mod common;

use proptest::prelude::*;

use cadfit::assembly::{backward_prune, greedy_select};
use cadfit::cli::{random_program, Complexity};
use cadfit::metrics::{
    chamfer_distance, compute_residuals, error_decomposition, iou_exact, ChamferMode, GridSpec,
};
use cadfit::program::{deserialize_program, serialize_program, Role};
use cadfit::{Aabb, Program, Solid, Vec3, VoxelGrid};

use common::*;

fn spec(n: usize) -> GridSpec {
    GridSpec::covering(&Aabb::new(Vec3::zeros(), Vec3::repeat(1.0)), n)
}

fn grid_from(bits: &[bool], n: usize) -> VoxelGrid {
    let s = spec(n);
    VoxelGrid::from_fn(s, |i| bits[i % bits.len()])
}

fn arb_box() -> impl Strategy<Value = (Vec3, Vec3)> {
    (
        prop::array::uniform3(-1.0f64..0.5),
        prop::array::uniform3(0.1f64..1.0),
    )
        .prop_map(|(lo, size)| {
            let lo = Vec3::from(lo);
            (lo, lo + Vec3::from(size))
        })
}

fn arb_box_program() -> impl Strategy<Value = Program> {
    prop::collection::vec((arb_box(), any::<bool>()), 1..5).prop_map(|parts| {
        Program::new(
            parts
                .into_iter()
                .enumerate()
                .map(|(i, ((lo, hi), cut))| {
                    let role = if cut && i > 0 { Role::Cut } else { Role::Union };
                    extrude_box(lo, hi, role)
                })
                .collect(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn iou_identity_and_bound(n in 2usize..12, a in prop::collection::vec(any::<bool>(), 1..200),
                              b in prop::collection::vec(any::<bool>(), 1..200)) {
        let target = grid_from(&a, n);
        let solid = grid_from(&b, n);
        prop_assume!(!target.is_empty());
        let iou = iou_exact(&solid, &target).unwrap();
        let c = compute_residuals(&target, &solid).unwrap().counts;
        let (m, p, q) = (c.target as u128, c.plus as u128, c.minus as u128);
        prop_assert_eq!(iou.inter as u128 * (m + q), (m - p) * iou.union as u128);
        prop_assert!((iou.union - iou.inter) as u128 * m <= (p + q) * iou.union as u128);
        let d = error_decomposition(c.a(), c.b()).unwrap();
        prop_assert!(d.bound_ok);
    }

    #[test]
    fn solid_matches_fold_oracle(program in arb_box_program(),
                                 pts in prop::collection::vec(prop::array::uniform3(-1.2f64..1.7), 200)) {
        let solid = Solid::new(program.clone()).unwrap();
        for p in pts {
            let p = Vec3::from(p);
            prop_assert_eq!(solid.contains(&p), fold_oracle(&program, &p), "at {:?}", p);
        }
    }

    #[test]
    fn generated_programs_match_fold_oracle(seed in any::<u64>(), index in 0usize..50, c in 0usize..3,
                                            pts in prop::collection::vec(prop::array::uniform3(-1.5f64..1.5), 200)) {
        let c = [Complexity::Easy, Complexity::Medium, Complexity::Hard][c];
        let program = random_program(c, seed, index).unwrap();
        let solid = Solid::new(program.clone()).unwrap();
        for p in pts {
            let p = Vec3::from(p);
            prop_assert_eq!(solid.contains(&p), fold_oracle(&program, &p));
        }
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), index in 0usize..50, c in 0usize..3) {
        let c = [Complexity::Easy, Complexity::Medium, Complexity::Hard][c];
        let program = random_program(c, seed, index).unwrap();
        let text = serialize_program(&program);
        let back = deserialize_program(&text).unwrap();
        prop_assert_eq!(&back, &program);
        prop_assert_eq!(serialize_program(&back), text);
    }

    #[test]
    fn symmetric_chamfer_is_symmetric(p in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 1..60),
                                      q in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 1..60)) {
        let p: Vec<Vec3> = p.into_iter().map(Vec3::from).collect();
        let q: Vec<Vec3> = q.into_iter().map(Vec3::from).collect();
        let pq = chamfer_distance(&p, &q, ChamferMode::Symmetric).unwrap();
        let qp = chamfer_distance(&q, &p, ChamferMode::Symmetric).unwrap();
        prop_assert_eq!(pq, qp);
        // brute-force one-sided oracle
        let brute = p.iter()
            .map(|a| q.iter().map(|b| (a - b).norm_squared()).fold(f64::INFINITY, f64::min))
            .sum::<f64>() / p.len() as f64;
        let fast = chamfer_distance(&p, &q, ChamferMode::OneSided).unwrap();
        prop_assert!((brute - fast).abs() <= 1e-12 * brute.max(1.0));
    }

    #[test]
    fn greedy_trace_increases_and_prune_is_irredundant(boxes in prop::collection::vec(arb_box(), 1..8),
                                                        goal_parts in 1usize..4) {
        let s = GridSpec::covering(&Aabb::new(Vec3::repeat(-1.0), Vec3::repeat(1.5)), 16);
        let masks: Vec<VoxelGrid> = boxes
            .iter()
            .map(|(lo, hi)| Solid::new(Program::new(vec![extrude_box(*lo, *hi, Role::Union)])).unwrap().voxelize(&s))
            .collect();
        let mut goal = VoxelGrid::empty(s);
        for m in masks.iter().take(goal_parts) {
            goal.or_assign(m);
        }
        prop_assume!(!goal.is_empty());
        let sel = greedy_select(&masks, &goal).unwrap();
        prop_assert!(sel.trace.windows(2).all(|w| w[1] > w[0]));

        let chosen: Vec<VoxelGrid> = sel.chosen.iter().map(|&i| masks[i].clone()).collect();
        let keep = backward_prune(&chosen, &vec![Role::Union; chosen.len()], &goal).unwrap();
        let union = |idx: &[usize]| {
            let mut g = VoxelGrid::empty(s);
            for &i in idx {
                g.or_assign(&chosen[i]);
            }
            iou_exact(&g, &goal).unwrap()
        };
        let full = union(&keep);
        prop_assert!(full >= union(&(0..chosen.len()).collect::<Vec<_>>()));
        for k in 0..keep.len() {
            let rest: Vec<usize> = keep.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, &i)| i).collect();
            prop_assert!(union(&rest) < full);
        }
    }
}
