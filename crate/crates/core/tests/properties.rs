use proptest::prelude::*;

use btl_core::estimators::{gradient, loss, MleProblem};
use btl_core::graph::{generate_grid, generate_special, ComparisonGraph, GridSpec, SamplePolicy, SpecialGraph};
use btl_core::laplacian::LaplacianOperator;
use btl_core::metrics::{bound_quantities, error_report};
use btl_core::model::{dynamic_range, oracle_laplacian, sample_comparisons, ScoreVector};
use btl_core::rng::seeded;

fn connected_er(n: usize, seed: u64, l: u64) -> ComparisonGraph {
    let mut s = seed;
    loop {
        let g = generate_special(&SpecialGraph::Er { n, p: 0.5 }, &SamplePolicy::Constant(l), &mut seeded(s)).unwrap();
        if g.is_connected() {
            return g;
        }
        s += 1_000_003;
    }
}

fn instance(n: usize, seed: u64, scores: &[f64]) -> (ComparisonGraph, MleProblem, ScoreVector) {
    let g = connected_er(n, seed, 8);
    let truth = ScoreVector::zero_sum(scores[..n].to_vec());
    let data = sample_comparisons(&g, &truth, &mut seeded(seed ^ 0xabc)).unwrap();
    let p = MleProblem::new(&g, &data).unwrap();
    (g, p, truth)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gradient_sums_to_zero(n in 3usize..12, seed in 0u64..1000, theta in prop::collection::vec(-4.0f64..4.0, 12)) {
        let (_, p, _) = instance(n, seed, &theta);
        let g = gradient(&p, &theta[..n]);
        let scale: f64 = g.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!(g.iter().sum::<f64>().abs() <= 1e-12 * scale);
    }

    #[test]
    fn loss_is_midpoint_convex(
        n in 3usize..12,
        seed in 0u64..1000,
        a in prop::collection::vec(-5.0f64..5.0, 12),
        b in prop::collection::vec(-5.0f64..5.0, 12),
    ) {
        let (_, p, _) = instance(n, seed, &a);
        let mid: Vec<f64> = a[..n].iter().zip(&b[..n]).map(|(x, y)| 0.5 * (x + y)).collect();
        let lhs = loss(&p, &mid);
        let rhs = 0.5 * (loss(&p, &a[..n]) + loss(&p, &b[..n]));
        prop_assert!(lhs <= rhs + 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn loss_ignores_common_shifts(n in 3usize..12, seed in 0u64..1000, theta in prop::collection::vec(-4.0f64..4.0, 12), c in -50.0f64..50.0) {
        let (_, p, _) = instance(n, seed, &theta);
        let shifted: Vec<f64> = theta[..n].iter().map(|t| t + c).collect();
        let (a, b) = (loss(&p, &theta[..n]), loss(&p, &shifted));
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn error_report_is_permutation_invariant(
        theta in prop::collection::vec(-3.0f64..3.0, 2..15),
        seed in 0u64..1000,
    ) {
        let n = theta.len();
        let truth: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7 + seed as f64).sin()).collect();
        let perm = btl_core::graph::random_permutation(n, &mut seeded(seed));
        let a = error_report(&ScoreVector::zero_sum(theta.clone()), &ScoreVector::zero_sum(truth.clone()), None).unwrap();
        let pt: Vec<f64> = perm.iter().map(|&i| theta[i]).collect();
        let ps: Vec<f64> = perm.iter().map(|&i| truth[i]).collect();
        let b = error_report(&ScoreVector::zero_sum(pt), &ScoreVector::zero_sum(ps), None).unwrap();
        prop_assert!((a.linf - b.linf).abs() < 1e-12);
        prop_assert!((a.max_pairwise - b.max_pairwise).abs() < 1e-12);
        prop_assert!((a.l2 - b.l2).abs() < 1e-12);
    }

    #[test]
    fn resistance_is_a_metric_and_monotone(n in 3usize..9, seed in 0u64..1000, bump in 1.1f64..5.0) {
        let g = connected_er(n, seed, 1);
        let lap = LaplacianOperator::assemble(n, g.edges().iter().map(|e| (e.i, e.j, 1.0 + (e.i * 7 + e.j) as f64 % 3.0))).unwrap();
        let omega = lap.resistance_matrix(None).unwrap();
        let w = |k: usize, l: usize| if k == l { 0.0 } else { omega.get(k, l).unwrap() };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    prop_assert!(w(i, k) <= w(i, j) + w(j, k) + 1e-9);
                }
            }
        }
        // adding an edge (or raising a weight) can only lower resistances
        let heavier = LaplacianOperator::assemble(n, lap.edges().iter().copied().chain([(0, n - 1, bump)])).unwrap();
        let after = heavier.resistance_matrix(None).unwrap();
        for &(k, l, v) in after.entries() {
            prop_assert!(v <= w(k, l) + 1e-9);
        }
    }

    #[test]
    fn q_and_v_respect_their_bounds(n in 4usize..10, seed in 0u64..500, scores in prop::collection::vec(-1.5f64..1.5, 10)) {
        let g = connected_er(n, seed, 6);
        let truth = ScoreVector::zero_sum(scores[..n].to_vec());
        let lz = oracle_laplacian(&g, &truth).unwrap();
        let (_, kappa_e) = dynamic_range(&g, &truth);
        let q = bound_quantities(&lz, &g, kappa_e, 0.1, 1.0, None).unwrap();
        let max_b2 = g
            .edges()
            .iter()
            .map(|e| q.entries.iter().find(|x| (x.k, x.l) == (e.i, e.j)).unwrap().b.powi(2))
            .fold(0.0f64, f64::max);
        let l_e = (6 * g.num_edges()) as f64;
        for e in &q.entries {
            prop_assert!(e.q <= max_b2 * e.v * (1.0 + 1e-9) + 1e-12);
            prop_assert!(e.v <= 4.0 * kappa_e * l_e.sqrt() * e.omega.sqrt() * (1.0 + 1e-9));
        }
    }
}

#[test]
fn grid_resistances_grow_with_distance() {
    // on a path-like grid the endpoint resistance dominates every other pair
    let g = generate_grid(&GridSpec::grid1d(40, 3, 1.0).unwrap(), &SamplePolicy::Constant(1), &mut seeded(0)).unwrap();
    let lz = oracle_laplacian(&g, &ScoreVector::zero_sum(vec![0.0; 40])).unwrap();
    let omega = lz.resistance_matrix(None).unwrap();
    assert_eq!(omega.max(), omega.get(0, 39).unwrap());
}
