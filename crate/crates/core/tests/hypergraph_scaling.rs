//! Cycle probability of sparse random hypergraphs at a size where cycles are
//! frequent enough to measure.

use streamcut::hypergraph::cycle_probability;

#[test]
fn cycle_probability_grows_quadratically_in_density() {
    let (n, k, trials) = (300, 3, 20_000);
    let lo = cycle_probability(n, k, 12, trials, 1).unwrap();
    let hi = cycle_probability(n, k, 24, trials, 2).unwrap();
    for (est, alpha) in [(&lo, 0.04), (&hi, 0.08)] {
        let bound = 2.0 * (k as f64).powi(4) * alpha * alpha;
        assert!(est.fraction <= bound + 3.0 * est.std_error, "{est:?} vs bound {bound}");
    }
    let ratio = hi.fraction / lo.fraction;
    assert!((3.0..=5.5).contains(&ratio), "ratio {ratio}: {lo:?} {hi:?}");
}
