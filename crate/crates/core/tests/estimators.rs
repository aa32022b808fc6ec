//! Estimators on their sampling paths, with sample sizes small enough that
//! the exact branches are not taken.

use proptest::prelude::*;
use streamcut::algorithms::{
    bounded_degree_dicut, bounded_degree_estimate, random_order_dicut, random_order_estimate, two_pass_dicut,
    AlgorithmParams, Branch, BoundedDegreeParams, BoundedOutcome,
};
use streamcut::graph::generate::{bounded_degree_graph, random_multigraph};
use streamcut::graph::{density_matrix, exact_dicut, BiasThresholds, DirectedMultigraph, ObliviousScheme};
use streamcut::seeding::{derive_seed, rng_from_seed, Role};
use streamcut::stream::{EdgeStream, SpaceMeter};

fn graph(n: usize, m: usize, seed: u64) -> DirectedMultigraph {
    random_multigraph(n, m, &mut rng_from_seed(seed))
}

#[test]
fn snapshot_concentration_with_small_sample() {
    let g = graph(50, 200, 1);
    let t = BiasThresholds::three_way();
    let exact = density_matrix(&g, &t);
    let good = (0..100)
        .filter(|&i| {
            let s = EdgeStream::permuted(&g, derive_seed(2, Role::StreamOrder, i));
            let out = random_order_estimate(&s, &t, 100, &mut SpaceMeter::new());
            assert!(!out.exact);
            out.matrix.max_abs_error(&exact) <= 0.1 * 200.0
        })
        .count();
    assert!(good >= 90, "{good}/100");
}

#[test]
fn snapshot_is_unbiased_over_orders() {
    let g = graph(8, 30, 3);
    let t = BiasThresholds::three_way();
    let exact = density_matrix(&g, &t);
    let trials = 20_000;
    let l = t.len();
    let mut sum = vec![0.0; l * l];
    let mut sq = vec![0.0; l * l];
    for i in 0..trials {
        let s = EdgeStream::permuted(&g, derive_seed(4, Role::StreamOrder, i));
        let out = random_order_estimate(&s, &t, 10, &mut SpaceMeter::new());
        for (j, &x) in out.matrix.entries().iter().enumerate() {
            sum[j] += x;
            sq[j] += x * x;
        }
    }
    let n = trials as f64;
    for a in 0..l {
        for b in 0..l {
            let j = a * l + b;
            let mean = sum[j] / n;
            let se = ((sq[j] / n - mean * mean).max(0.0) / n).sqrt();
            // 4 standard errors across the 9 entries
            let want = exact.get(a, b) as f64;
            assert!((mean - want).abs() <= 4.0 * se + 1e-9, "entry ({a},{b}): {mean} vs {want}, se {se}");
        }
    }
}

fn in_band(est: Option<f64>, val: u64) -> bool {
    let v = val as f64;
    est.is_some_and(|e| e >= 0.4 * v && e <= v + 1e-9)
}

#[test]
fn random_order_sampled_path_end_to_end() {
    let scheme = ObliviousScheme::default_scheme();
    let params = AlgorithmParams::for_scheme(0.1, &scheme).unwrap().with_k(45).with_m0(50);
    let g = graph(12, 60, 5);
    let val = exact_dicut(&g).unwrap().value;
    let mut good = 0;
    for i in 0..200 {
        let s = EdgeStream::permuted(&g, derive_seed(6, Role::StreamOrder, i));
        let out = random_order_dicut(&s, &params, &scheme);
        assert_eq!(out.branch_used, Branch::Sampled);
        assert!(out.space_highwater.tracked_vertices <= params.tracked_vertex_bound());
        good += in_band(out.estimate, val) as usize;
    }
    assert!(3 * good >= 2 * 200, "{good}/200");
}

#[test]
fn two_pass_sorted_order_end_to_end() {
    let scheme = ObliviousScheme::default_scheme();
    let params = AlgorithmParams::for_scheme(0.1, &scheme).unwrap().with_k(45).with_m0(50);
    let g = graph(12, 60, 7);
    let val = exact_dicut(&g).unwrap().value;
    let s = EdgeStream::sorted_by_source(&g);
    let mut good = 0;
    for i in 0..200 {
        let out = two_pass_dicut(&s, &params, &scheme, derive_seed(8, Role::AlgorithmCoins, i));
        assert_eq!(out.branch_used, Branch::Sampled);
        assert!(out.space_highwater.tracked_vertices <= params.tracked_vertex_bound());
        good += in_band(out.estimate, val) as usize;
    }
    assert!(3 * good >= 2 * 200, "{good}/200");
}

#[test]
fn bounded_degree_snapshot_with_half_of_vertices_sampled() {
    let g = bounded_degree_graph(5000, 4, &mut rng_from_seed(9));
    let m = g.m() as u64;
    let m_hat = 1u64 << (63 - m.leading_zeros());
    let t = BiasThresholds::three_way();
    let exact = density_matrix(&g, &t);
    let s = EdgeStream::as_given(&g);
    for frac in [0.5, 0.1] {
        let k = frac * m_hat as f64 / (m_hat as f64).sqrt();
        let mut good = 0;
        for i in 0..100 {
            let mut meter = SpaceMeter::new();
            let out = bounded_degree_estimate(&s, &t, k, m_hat, derive_seed(10, Role::Hash, i), &mut meter).unwrap();
            let st = k * (m_hat as f64).sqrt();
            let cap = (5.0 * st * 5000f64.min(4.0 * m_hat as f64) / m_hat as f64).ceil();
            if let BoundedOutcome::Estimate(e) = out {
                assert!(!e.exact);
                assert!(meter.peak().tracked_vertices as f64 <= cap);
                good += (e.matrix.max_abs_error(&exact) <= 0.1 * m as f64) as usize;
            }
        }
        assert!(3 * good >= 2 * 100, "s/m_hat = {frac}: {good}/100");
    }
}

#[test]
fn bounded_degree_end_to_end_small_graphs() {
    let scheme = ObliviousScheme::default_scheme();
    let params = BoundedDegreeParams::new(0.1, scheme.len(), 3).unwrap();
    let mut good_graphs = 0;
    for gi in 0..10 {
        let g = bounded_degree_graph(14, 3, &mut rng_from_seed(100 + gi));
        assert!(g.max_degree() <= 3);
        let val = exact_dicut(&g).unwrap().value;
        let good = (0..200)
            .filter(|&i| {
                let out = bounded_degree_dicut(&EdgeStream::as_given(&g), &params, &scheme, derive_seed(gi, Role::Hash, i));
                in_band(out.estimate, val)
            })
            .count();
        good_graphs += (3 * good >= 2 * 200) as usize;
    }
    assert_eq!(good_graphs, 10);
}

#[test]
fn bounded_degree_hashed_branch_is_chosen_above_cutoff() {
    let scheme = ObliviousScheme::default_scheme();
    let g = bounded_degree_graph(400, 4, &mut rng_from_seed(11));
    // threshold s = k sqrt(m_hat) >= m_hat at every branch up to 1024
    let params = BoundedDegreeParams::new(0.1, scheme.len(), 4).unwrap().with_k(40.0).with_exact_cutoff(10);
    let out = bounded_degree_dicut(&EdgeStream::as_given(&g), &params, &scheme, 12);
    let b = 63 - (g.m() as u64).leading_zeros();
    assert_eq!(out.branch_used, Branch::Hashed { b });
    assert!(out.estimate.unwrap() <= exact_upper(&g) + 1e-9);
}

fn exact_upper(g: &DirectedMultigraph) -> f64 {
    g.m() as f64
}

#[test]
fn bounded_degree_all_fail_is_unavailable() {
    let scheme = ObliviousScheme::default_scheme();
    let g = bounded_degree_graph(200, 4, &mut rng_from_seed(13));
    let params = BoundedDegreeParams::new(0.1, scheme.len(), 4).unwrap().with_k(1e-6).with_exact_cutoff(5);
    let out = bounded_degree_dicut(&EdgeStream::as_given(&g), &params, &scheme, 14);
    assert_eq!(out.branch_used, Branch::Unavailable);
    assert_eq!(out.estimate, None);
    assert_eq!(out.failed_branches.len(), out.seeds.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn outputs_bounded_by_m_and_deterministic(n in 2usize..15, m in 0usize..80, k in 1u64..40, seed in any::<u64>()) {
        let scheme = ObliviousScheme::default_scheme();
        let params = AlgorithmParams::for_scheme(0.1, &scheme).unwrap().with_k(k).with_m0(k + 5);
        let g = graph(n, m, seed);
        let s = EdgeStream::permuted(&g, seed ^ 1);
        let a = random_order_dicut(&s, &params, &scheme);
        let b = random_order_dicut(&s, &params, &scheme);
        prop_assert_eq!(&a, &b);
        let tp = two_pass_dicut(&s, &params, &scheme, seed);
        prop_assert_eq!(&tp, &two_pass_dicut(&s, &params, &scheme, seed));
        let bp = BoundedDegreeParams::new(0.1, scheme.len(), g.max_degree().max(1)).unwrap().with_k(k as f64 / 4.0).with_exact_cutoff(k);
        let bd = bounded_degree_dicut(&s, &bp, &scheme, seed);
        prop_assert_eq!(&bd, &bounded_degree_dicut(&s, &bp, &scheme, seed));
        let tol = 1e-9 * (m as f64).max(1.0);
        for out in [&a, &tp, &bd] {
            if let Some(e) = out.estimate {
                prop_assert!(e <= m as f64 + tol);
            }
        }
        for out in [&a, &tp] {
            prop_assert!(out.space_highwater.tracked_vertices <= params.tracked_vertex_bound());
        }
    }
}
