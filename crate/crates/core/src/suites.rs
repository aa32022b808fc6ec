//! Fixed-seed verification suites.
//!
//! Each numbered criterion is a Monte Carlo or exhaustive check against an
//! independent oracle. A criterion passes when its check holds and it
//! finished within its wall-clock limit.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::algorithms::{
    bounded_degree_estimate, random_order_dicut, random_order_estimate, two_pass_dicut, AlgorithmParams,
    BoundedDegreeParams, BoundedOutcome,
};
use crate::csp::{brute_force_val, clean, rho_min, sample_rmd_stream, val_at, Predicate, RmdFamily, Value};
use crate::graph::generate::{bounded_degree_graph, random_multigraph};
use crate::graph::{
    density_matrix, exact_dicut, oblivious_estimate, BiasThresholds, DirectedMultigraph, ObliviousScheme,
};
use crate::hashing::sample_hash;
use crate::hypergraph::{cc_part, count_s_vectors, cycle_probability, is_cycle_free, Hypergraph};
use crate::seeding::{derive_seed, derived_rng, Role};
use crate::stream::{EdgeStream, Reservoir, SpaceMeter};

pub const DEFAULT_SEED: u64 = 20_251_014;

/// Lower ratio floor for a user-supplied scheme, before subtracting `eps`.
pub const USER_SCHEME_FLOOR: f64 = 0.483;

/// Ratio floor of the shipped default scheme.
pub const DEFAULT_SCHEME_FLOOR: f64 = 0.45;

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Replaces the default scheme in the sandwich criteria.
    pub scheme: Option<ObliviousScheme>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: DEFAULT_SEED, scheme: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Sandwich,
    Concentration,
    Reservoir,
    Hash,
    Rmd,
    Hypergraph,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Sandwich, Suite::Concentration, Suite::Reservoir, Suite::Hash, Suite::Rmd, Suite::Hypergraph];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Sandwich => "sandwich",
            Suite::Concentration => "concentration",
            Suite::Reservoir => "reservoir",
            Suite::Hash => "hash",
            Suite::Rmd => "rmd",
            Suite::Hypergraph => "hypergraph",
        }
    }

    pub fn criteria(self) -> &'static [u32] {
        match self {
            Suite::Sandwich => &[1, 2],
            Suite::Concentration => &[3, 4, 5, 6, 14],
            Suite::Reservoir => &[7],
            Suite::Hash => &[8],
            Suite::Rmd => &[9, 10, 11],
            Suite::Hypergraph => &[12, 13],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite {s:?}; expected one of sandwich, concentration, reservoir, hash, rmd, hypergraph"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: String,
    /// The check held and the run finished within `limit_secs`.
    pub passed: bool,
    pub check_passed: bool,
    pub elapsed_secs: f64,
    pub limit_secs: Option<f64>,
    pub detail: String,
    pub stats: BTreeMap<String, f64>,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        let limit = self.limit_secs.map_or_else(|| "no limit".to_string(), |l| format!("limit {l:.0}s"));
        format!(
            "[{}] {:>2} {}: {} ({:.2}s, {})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed_secs,
            limit
        )
    }
}

struct Check {
    ok: bool,
    detail: String,
    stats: BTreeMap<String, f64>,
}

impl Check {
    fn new(ok: bool, detail: String) -> Self {
        Check { ok, detail, stats: BTreeMap::new() }
    }

    fn stat(mut self, key: &str, v: f64) -> Self {
        self.stats.insert(key.to_string(), v);
        self
    }
}

fn timed(id: u32, name: &str, limit_secs: Option<f64>, f: impl FnOnce() -> Check) -> CriterionReport {
    let start = Instant::now();
    let c = f();
    let elapsed_secs = start.elapsed().as_secs_f64();
    let in_time = limit_secs.is_none_or(|l| elapsed_secs < l);
    CriterionReport {
        id,
        name: name.to_string(),
        passed: c.ok && in_time,
        check_passed: c.ok,
        elapsed_secs,
        limit_secs,
        detail: c.detail,
        stats: c.stats,
    }
}

/// Per-criterion master seed.
fn criterion_seed(cfg: &SuiteConfig, id: u32) -> u64 {
    derive_seed(cfg.seed, Role::Instance, id as u64)
}

pub const CRITERIA: [(u32, &str); 14] = [
    (1, "sandwich upper bound"),
    (2, "sandwich lower band"),
    (3, "snapshot concentration"),
    (4, "random-order end-to-end"),
    (5, "two-pass adversarial order"),
    (6, "bounded-degree snapshot"),
    (7, "reservoir uniformity"),
    (8, "4-wise hash family"),
    (9, "rmd yes perfection"),
    (10, "rmd no concentration"),
    (11, "rho_min oracle"),
    (12, "labelling count structure"),
    (13, "cycle probability bound and scaling"),
    (14, "space meters"),
];

fn criterion_name(id: u32) -> &'static str {
    CRITERIA.iter().find(|(i, _)| *i == id).map(|(_, n)| *n).expect("known criterion")
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Vec<CriterionReport> {
    match suite {
        Suite::Concentration => {
            let (r3, s3) = criterion_3(cfg);
            let (r4, s4) = criterion_4(cfg);
            let (r5, s5) = criterion_5(cfg);
            let r6 = criterion_6(cfg);
            let r14 = criterion_14(&[s3, s4, s5]);
            vec![r3, r4, r5, r6, r14]
        }
        _ => suite.criteria().iter().map(|&id| run_criterion(id, cfg)).collect(),
    }
}

pub fn run_all(cfg: &SuiteConfig) -> Vec<CriterionReport> {
    let mut out: Vec<CriterionReport> = Suite::ALL.iter().flat_map(|&s| run_suite(s, cfg)).collect();
    out.sort_by_key(|r| r.id);
    out
}

/// Runs one criterion; 14 reruns 3 to 5 to collect its meters.
pub fn run_criterion(id: u32, cfg: &SuiteConfig) -> CriterionReport {
    match id {
        1 => criterion_1(cfg),
        2 => criterion_2(cfg),
        3 => criterion_3(cfg).0,
        4 => criterion_4(cfg).0,
        5 => criterion_5(cfg).0,
        6 => criterion_6(cfg),
        7 => criterion_7(cfg),
        8 => criterion_8(cfg),
        9 => criterion_9(cfg),
        10 => criterion_10(cfg),
        11 => criterion_11(cfg),
        12 => criterion_12(cfg),
        13 => criterion_13(cfg),
        14 => {
            let s = [criterion_3(cfg).1, criterion_4(cfg).1, criterion_5(cfg).1];
            criterion_14(&s)
        }
        _ => panic!("no criterion {id}"),
    }
}

// ---- sandwich ----

/// 500 graphs with `n` in 4..=10 and `m` in 1..=20.
fn sandwich_corpus(seed: u64) -> Vec<DirectedMultigraph> {
    (0..500u64)
        .map(|i| {
            let mut rng = derived_rng(seed, Role::Instance, i);
            let n = rand::Rng::gen_range(&mut rng, 4..=10);
            let m = rand::Rng::gen_range(&mut rng, 1..=20);
            random_multigraph(n, m, &mut rng)
        })
        .collect()
}

/// `(estimate with eps = 0, exact value)` per graph.
fn sandwich_values(cfg: &SuiteConfig, scheme: &ObliviousScheme) -> Vec<(f64, u64)> {
    // both sandwich criteria share one corpus
    let corpus = sandwich_corpus(criterion_seed(cfg, 1));
    corpus
        .par_iter()
        .map(|g| {
            let m = density_matrix(g, scheme.thresholds());
            let est = oblivious_estimate(&(&m).into(), scheme, g.m() as u64, 0.0).expect("matching dimension");
            (est, exact_dicut(g).expect("n <= 10").value)
        })
        .collect()
}

fn scheme_of(cfg: &SuiteConfig) -> ObliviousScheme {
    cfg.scheme.clone().unwrap_or_else(ObliviousScheme::default_scheme)
}

fn criterion_1(cfg: &SuiteConfig) -> CriterionReport {
    timed(1, criterion_name(1), Some(30.0), || {
        let vals = sandwich_values(cfg, &scheme_of(cfg));
        let bad = vals.iter().filter(|(e, v)| *e > *v as f64 + 1e-9).count();
        let worst = vals.iter().map(|(e, v)| e - *v as f64).fold(f64::NEG_INFINITY, f64::max);
        Check::new(bad == 0, format!("{} of {} graphs with estimate <= val; max(estimate - val) = {worst:.4}", vals.len() - bad, vals.len()))
            .stat("violations", bad as f64)
            .stat("max_excess", worst)
    })
}

fn criterion_2(cfg: &SuiteConfig) -> CriterionReport {
    timed(2, criterion_name(2), Some(30.0), || {
        // estimates here use eps = 0
        let floor = if cfg.scheme.is_some() { USER_SCHEME_FLOOR } else { DEFAULT_SCHEME_FLOOR };
        let vals = sandwich_values(cfg, &scheme_of(cfg));
        let ratios: Vec<f64> = vals.iter().filter(|(_, v)| *v > 0).map(|(e, v)| e / *v as f64).collect();
        let bad = ratios.iter().filter(|&&r| r < floor).count();
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        Check::new(bad == 0, format!("{} of {} ratios >= {floor}; min ratio {min:.4}", ratios.len() - bad, ratios.len()))
            .stat("min_ratio", min)
            .stat("floor", floor)
            .stat("violations", bad as f64)
    })
}

// ---- concentration ----

/// Space observations for criterion 14.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpaceTally {
    pub trials: usize,
    pub violations: usize,
    /// Largest `tracked / (2k + 2 m0)`.
    pub max_fraction: f64,
}

impl SpaceTally {
    fn observe(&mut self, tracked: u64, bound: u64) {
        self.trials += 1;
        if tracked > bound {
            self.violations += 1;
        }
        self.max_fraction = self.max_fraction.max(tracked as f64 / bound.max(1) as f64);
    }
}

fn criterion_3(cfg: &SuiteConfig) -> (CriterionReport, SpaceTally) {
    let mut tally = SpaceTally::default();
    let report = timed(3, criterion_name(3), Some(60.0), || {
        let seed = criterion_seed(cfg, 3);
        let g = random_multigraph(50, 2000, &mut derived_rng(seed, Role::Instance, 0));
        let t = BiasThresholds::three_way();
        let params = AlgorithmParams::from_eps_prime(0.05, 3).expect("valid");
        let exact = density_matrix(&g, &t);
        let tol = params.eps_prime * g.m() as f64;
        let runs: Vec<(f64, bool, u64)> = (0..100u64)
            .into_par_iter()
            .map(|i| {
                let s = EdgeStream::permuted(&g, derive_seed(seed, Role::StreamOrder, i));
                let mut meter = SpaceMeter::new();
                let out = random_order_estimate(&s, &t, params.k, &mut meter);
                (out.matrix.max_abs_error(&exact), out.exact, meter.peak().tracked_vertices)
            })
            .collect();
        let good = runs.iter().filter(|r| r.0 <= tol).count();
        let exact_runs = runs.iter().filter(|r| r.1).count();
        let max_err = runs.iter().map(|r| r.0).fold(0.0, f64::max);
        for r in &runs {
            tally.observe(r.2, params.tracked_vertex_bound());
        }
        Check::new(
            good >= 80,
            format!(
                "{good}/100 trials within eps'm = {tol}; k = {}, m = {}, {exact_runs} trials took the k >= m exact path; max error {max_err:.2}",
                params.k,
                g.m()
            ),
        )
        .stat("good", good as f64)
        .stat("k", params.k as f64)
        .stat("max_error", max_err)
    });
    (report, tally)
}

/// 50 graphs, `n = 12`, `m = 60`.
fn end_to_end_corpus(seed: u64) -> Vec<(DirectedMultigraph, u64)> {
    (0..50u64)
        .map(|i| {
            let g = random_multigraph(12, 60, &mut derived_rng(seed, Role::Instance, i));
            let val = exact_dicut(&g).expect("n = 12").value;
            (g, val)
        })
        .collect()
}

/// Per-graph success counts out of 20 trials, and space readings.
fn end_to_end(
    cfg: &SuiteConfig,
    trial: impl Fn(&DirectedMultigraph, &AlgorithmParams, &ObliviousScheme, u64) -> crate::algorithms::DicutOutput + Sync,
) -> (Vec<usize>, Vec<u64>, AlgorithmParams, f64) {
    let scheme = ObliviousScheme::default_scheme();
    let params = AlgorithmParams::for_scheme(0.1, &scheme).expect("valid");
    let seed = criterion_seed(cfg, 4);
    let corpus = end_to_end_corpus(seed);
    let per_graph: Vec<(usize, Vec<u64>, f64)> = corpus
        .par_iter()
        .enumerate()
        .map(|(gi, (g, val))| {
            let mut ok = 0;
            let mut tracked = Vec::new();
            let mut worst = f64::INFINITY;
            for j in 0..20u64 {
                let out = trial(g, &params, &scheme, derive_seed(seed, Role::StreamOrder, gi as u64 * 20 + j));
                let est = out.estimate.unwrap_or(f64::NAN);
                let v = *val as f64;
                if est >= 0.4 * v && est <= v + 1e-9 * v.max(1.0) {
                    ok += 1;
                }
                worst = worst.min(est / v);
                tracked.push(out.space_highwater.tracked_vertices);
            }
            (ok, tracked, worst)
        })
        .collect();
    let min_ratio = per_graph.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let counts = per_graph.iter().map(|p| p.0).collect();
    let tracked = per_graph.into_iter().flat_map(|p| p.1).collect();
    (counts, tracked, params, min_ratio)
}

fn end_to_end_check(counts: &[usize], params: &AlgorithmParams, min_ratio: f64) -> Check {
    // at least 2/3 of 20 trials
    let good_graphs = counts.iter().filter(|&&c| 3 * c >= 2 * 20).count();
    let mode = if 60 < params.m0 { "exact prefix path (m < m0)" } else { "sampled path" };
    Check::new(
        good_graphs >= 45,
        format!("{good_graphs}/50 graphs with >= 14/20 trials in [0.4 val, val]; m0 = {}, {mode}; min ratio {min_ratio:.4}", params.m0),
    )
    .stat("good_graphs", good_graphs as f64)
    .stat("min_ratio", min_ratio)
}

fn criterion_4(cfg: &SuiteConfig) -> (CriterionReport, SpaceTally) {
    let mut tally = SpaceTally::default();
    let report = timed(4, criterion_name(4), Some(120.0), || {
        let (counts, tracked, params, min_ratio) = end_to_end(cfg, |g, p, sch, seed| {
            random_order_dicut(&EdgeStream::permuted(g, seed), p, sch)
        });
        for t in tracked {
            tally.observe(t, params.tracked_vertex_bound());
        }
        end_to_end_check(&counts, &params, min_ratio)
    });
    (report, tally)
}

fn criterion_5(cfg: &SuiteConfig) -> (CriterionReport, SpaceTally) {
    let mut tally = SpaceTally::default();
    let report = timed(5, criterion_name(5), Some(120.0), || {
        let (counts, tracked, params, min_ratio) = end_to_end(cfg, |g, p, sch, seed| {
            two_pass_dicut(&EdgeStream::sorted_by_source(g), p, sch, seed)
        });
        for t in tracked {
            tally.observe(t, params.tracked_vertex_bound());
        }
        end_to_end_check(&counts, &params, min_ratio)
    });
    (report, tally)
}

fn criterion_6(cfg: &SuiteConfig) -> CriterionReport {
    timed(6, criterion_name(6), Some(180.0), || {
        let seed = criterion_seed(cfg, 6);
        let g = bounded_degree_graph(5000, 4, &mut derived_rng(seed, Role::Instance, 0));
        let m = g.m() as u64;
        let m_hat = 1u64 << (63 - m.leading_zeros());
        let t = BiasThresholds::three_way();
        let params = BoundedDegreeParams::from_eps_prime(0.1, 3, 4).expect("valid");
        let exact = density_matrix(&g, &t);
        let s = EdgeStream::as_given(&g);
        let runs: Vec<(Option<f64>, bool)> = (0..100u64)
            .into_par_iter()
            .map(|i| {
                let mut meter = SpaceMeter::new();
                let hash_seed = derive_seed(seed, Role::Hash, i);
                let out = bounded_degree_estimate(&s, &t, params.k, m_hat, hash_seed, &mut meter).expect("valid range");
                let cap = (5.0 * params.k * (m_hat as f64).sqrt() * (5000f64).min(4.0 * m_hat as f64) / m_hat as f64).ceil();
                match out {
                    BoundedOutcome::Fail(_) => (None, true),
                    BoundedOutcome::Estimate(e) => {
                        (Some(e.matrix.max_abs_error(&exact)), meter.peak().tracked_vertices as f64 <= cap)
                    }
                }
            })
            .collect();
        let tol = 0.1 * m as f64;
        let good = runs.iter().filter(|r| r.0.is_some_and(|e| e <= tol)).count();
        let fails = runs.iter().filter(|r| r.0.is_none()).count();
        let space_bad = runs.iter().filter(|r| !r.1).count();
        let s_val = params.k * (m_hat as f64).sqrt();
        let note = if s_val >= m_hat as f64 { "; s >= m_hat so every vertex is sampled" } else { "" };
        Check::new(
            3 * good >= 2 * 100 && space_bad == 0,
            format!(
                "{good}/100 non-Fail within 0.1m, {fails} Fail, {space_bad} over the tracked cap; m = {m}, m_hat = {m_hat}, k = {}{note}",
                params.k
            ),
        )
        .stat("good", good as f64)
        .stat("fails", fails as f64)
        .stat("space_violations", space_bad as f64)
    })
}

fn criterion_14(tallies: &[SpaceTally]) -> CriterionReport {
    timed(14, criterion_name(14), None, || {
        let trials: usize = tallies.iter().map(|t| t.trials).sum();
        let bad: usize = tallies.iter().map(|t| t.violations).sum();
        let frac = tallies.iter().map(|t| t.max_fraction).fold(0.0, f64::max);
        Check::new(
            bad == 0 && trials > 0,
            format!("{}/{trials} trials of criteria 3-5 within 2k + 2m0; max fraction used {frac:.2e}", trials - bad),
        )
        .stat("trials", trials as f64)
        .stat("violations", bad as f64)
    })
}

// ---- reservoir ----

fn criterion_7(cfg: &SuiteConfig) -> CriterionReport {
    timed(7, criterion_name(7), Some(60.0), || {
        let seed = criterion_seed(cfg, 7);
        let trials = 100_000u64;
        let counts = (0..trials)
            .into_par_iter()
            .fold(
                || vec![0u64; 100],
                |mut acc, i| {
                    let mut r = Reservoir::new(10, derive_seed(seed, Role::AlgorithmCoins, i));
                    for x in 0..100usize {
                        r.step(x);
                    }
                    for &x in r.items() {
                        acc[x] += 1;
                    }
                    acc
                },
            )
            .reduce(|| vec![0u64; 100], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
        let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / trials as f64).collect();
        let (lo, hi) = freqs.iter().fold((f64::INFINITY, 0f64), |(l, h), &f| (l.min(f), h.max(f)));
        Check::new(
            lo >= 0.09 && hi <= 0.11,
            format!("retention frequencies in [{lo:.4}, {hi:.4}], band [0.09, 0.11]"),
        )
        .stat("min_freq", lo)
        .stat("max_freq", hi)
    })
}

// ---- hash ----

fn criterion_8(cfg: &SuiteConfig) -> CriterionReport {
    timed(8, criterion_name(8), Some(60.0), || {
        let seed = criterion_seed(cfg, 8);
        let samples = 100_000u64;
        let (marg, joint) = (0..samples)
            .into_par_iter()
            .fold(
                || (vec![0u64; 64], vec![0u64; 4096]),
                |(mut marg, mut joint), i| {
                    let h = sample_hash(8, 8, 4, derive_seed(seed, Role::Hash, i)).expect("valid");
                    let ys: Vec<u64> = (0..8).map(|x| h.eval_unchecked(x)).collect();
                    for (x, &y) in ys.iter().enumerate() {
                        marg[x * 8 + y as usize] += 1;
                    }
                    joint[(ys[0] + 8 * ys[1] + 64 * ys[2] + 512 * ys[3]) as usize] += 1;
                    (marg, joint)
                },
            )
            .reduce(
                || (vec![0; 64], vec![0; 4096]),
                |a, b| {
                    let add = |x: &[u64], y: &[u64]| x.iter().zip(y).map(|(p, q)| p + q).collect::<Vec<u64>>();
                    (add(&a.0, &b.0), add(&a.1, &b.1))
                },
            );
        let max_dev = marg.iter().map(|&c| (c as f64 / samples as f64 - 0.125).abs()).fold(0.0, f64::max);
        let expected = samples as f64 / 4096.0;
        let chi2: f64 = joint.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        let crit = ChiSquared::new(4095.0).expect("positive dof").inverse_cdf(0.999);
        Check::new(
            max_dev <= 0.01 && chi2 < crit,
            format!("max marginal deviation {max_dev:.4} (band 0.01); chi-square on points 0..3 = {chi2:.1} < {crit:.1}"),
        )
        .stat("max_marginal_deviation", max_dev)
        .stat("chi_square", chi2)
        .stat("chi_square_critical", crit)
    })
}

// ---- rmd ----

/// `(samples with a nonempty cleaned instance, failures)` for YES samples.
fn yes_perfection(family: &RmdFamily, seed: u64) -> (usize, usize) {
    let preds = family.predicates();
    let one = Value::from_integer(1);
    let res: Vec<Option<bool>> = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let s = sample_rmd_stream(family, 10, 5, 5, derive_seed(seed, Role::Instance, i)).expect("valid");
            let psi = clean(&s.symbols, s.n, &preds).expect("valid");
            if psi.m() == 0 {
                return None;
            }
            let at = val_at(&psi, &s.x_star).expect("valid");
            let best = brute_force_val(&psi).expect("n = 10");
            Some(at == one && best == one)
        })
        .collect();
    let nonempty = res.iter().flatten().count();
    let bad = res.iter().flatten().filter(|ok| !**ok).count();
    (nonempty, bad)
}

fn criterion_9(cfg: &SuiteConfig) -> CriterionReport {
    timed(9, criterion_name(9), Some(10.0), || {
        let seed = criterion_seed(cfg, 9);
        let (dn, db) = yes_perfection(&RmdFamily::dicut(), seed);
        let (cn, cb) = yes_perfection(&RmdFamily::cut(), derive_seed(seed, Role::Instance, 1 << 32));
        Check::new(
            db == 0 && cb == 0,
            format!(
                "DICUT (point mask): {}/{dn} nonempty cleaned instances perfect; CUT (one-wise mask): {}/{cn} perfect",
                dn - db,
                cn - cb
            ),
        )
        .stat("dicut_failures", db as f64)
        .stat("cut_failures", cb as f64)
    })
}

fn criterion_10(cfg: &SuiteConfig) -> CriterionReport {
    timed(10, criterion_name(10), Some(120.0), || {
        let seed = criterion_seed(cfg, 10);
        let family = RmdFamily::dicut();
        let preds = family.predicates();
        let (n, alpha_n, samples) = (12usize, 600usize, 100usize);
        let res: Vec<(f64, usize)> = (0..samples as u64)
            .into_par_iter()
            .map(|i| {
                let s = sample_rmd_stream(&family, n, alpha_n, 0, derive_seed(seed, Role::Instance, i)).expect("valid");
                let psi = clean(&s.symbols, n, &preds).expect("valid");
                let v = brute_force_val(&psi).expect("n = 12");
                ((*v.numer() as f64) / (*v.denom() as f64), psi.m())
            })
            .collect();
        let low = res.iter().filter(|r| r.0 <= 0.45).count();
        let max_val = res.iter().map(|r| r.0).fold(0.0, f64::max);
        // z = 0^k with probability q^-k = 1/4
        let p = 0.25;
        let mean_count = res.iter().map(|r| r.1 as f64).sum::<f64>() / samples as f64;
        let expect = alpha_n as f64 * p;
        let se = (alpha_n as f64 * p * (1.0 - p) / samples as f64).sqrt();
        let per_sample_se = (alpha_n as f64 * p * (1.0 - p)).sqrt();
        let within_single = res.iter().filter(|r| (r.1 as f64 - expect).abs() <= 3.0 * per_sample_se).count();
        let count_ok = (mean_count - expect).abs() <= 3.0 * se;
        Check::new(
            low >= 90 && count_ok,
            format!(
                "{low}/100 cleaned values <= 0.45 (max {max_val:.3}); mean cleaned count {mean_count:.2} vs {expect} +- 3*{se:.3}; {within_single}/100 single counts within 3 SE"
            ),
        )
        .stat("low_value_samples", low as f64)
        .stat("mean_clean_count", mean_count)
        .stat("standard_error", se)
    })
}

fn criterion_11(_cfg: &SuiteConfig) -> CriterionReport {
    timed(11, criterion_name(11), Some(5.0), || {
        let d = rho_min(&[(Predicate::dicut(), 1.0)], 1000).expect("valid").value;
        let c = rho_min(&[(Predicate::cut(), 1.0)], 1000).expect("valid").value;
        Check::new(
            (0.2499..=0.2501).contains(&d) && (0.4999..=0.5001).contains(&c),
            format!("rho_min(DICUT) = {d:.6}, rho_min(CUT) = {c:.6}"),
        )
        .stat("dicut", d)
        .stat("cut", c)
    })
}

// ---- hypergraph ----

/// Every hypergraph on `n <= 6` vertices with `k = 2` and `m <= 2`.
fn small_hypergraphs() -> Vec<Hypergraph> {
    let mut out = Vec::new();
    for n in 2..=6usize {
        let pairs: Vec<Vec<u32>> =
            (0..n as u32).flat_map(|a| (0..n as u32).filter(move |&b| b != a).map(move |b| vec![a, b])).collect();
        out.push(Hypergraph::new(n, 2, vec![]).expect("valid"));
        for p in &pairs {
            out.push(Hypergraph::new(n, 2, vec![p.clone()]).expect("valid"));
            for r in &pairs {
                out.push(Hypergraph::new(n, 2, vec![p.clone(), r.clone()]).expect("valid"));
            }
        }
    }
    out
}

/// Every `v in Z_q^n` with support size in `1..=4`.
fn small_vectors(n: usize, q: u32) -> Vec<Vec<u32>> {
    let total = (q as u64).pow(n as u32);
    (0..total)
        .map(|mut c| {
            (0..n)
                .map(|_| {
                    let d = (c % q as u64) as u32;
                    c /= q as u64;
                    d
                })
                .collect::<Vec<u32>>()
        })
        .filter(|v| (1..=4).contains(&v.iter().filter(|&&x| x != 0).count()))
        .collect()
}

fn criterion_12(_cfg: &SuiteConfig) -> CriterionReport {
    timed(12, criterion_name(12), Some(120.0), || {
        let graphs = small_hypergraphs();
        let (checked, positive, bad) = [2u32, 3]
            .into_iter()
            .map(|q| {
                graphs
                    .par_iter()
                    .map(|g| {
                        let (mut checked, mut positive, mut bad) = (0usize, 0usize, 0usize);
                        let cf = is_cycle_free(g);
                        for v in small_vectors(g.n(), q) {
                            checked += 1;
                            let count = count_s_vectors(g, q, &v).expect("small");
                            if count == 0 {
                                continue;
                            }
                            positive += 1;
                            let support: Vec<u32> = (0..g.n() as u32).filter(|&i| v[i as usize] != 0).collect();
                            let part = cc_part(g, &support);
                            let bound = (q as u64).pow((g.k() * part.r_total) as u32);
                            if !(cf && part.valid && count <= bound) {
                                bad += 1;
                            }
                        }
                        (checked, positive, bad)
                    })
                    .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2))
            })
            .fold((0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
        Check::new(
            bad == 0 && checked > 0,
            format!("{checked} (G, v, q) cases over {} hypergraphs, {positive} with positive count, {bad} violations", graphs.len()),
        )
        .stat("cases", checked as f64)
        .stat("positive", positive as f64)
        .stat("violations", bad as f64)
    })
}

fn criterion_13(cfg: &SuiteConfig) -> CriterionReport {
    timed(13, criterion_name(13), Some(120.0), || {
        let seed = criterion_seed(cfg, 13);
        let (k, n, trials) = (3usize, 3000usize, 2000usize);
        let alphas = [0.002f64, 0.004];
        let est: Vec<_> = alphas
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let alpha_n = (a * n as f64).round() as usize;
                let e = cycle_probability(n, k, alpha_n, trials, derive_seed(seed, Role::Instance, i as u64)).expect("k <= n");
                let bound = 2.0 * (k as f64).powi(4) * a * a;
                (a, e, bound)
            })
            .collect();
        let bound_ok = est.iter().all(|(_, e, b)| e.fraction <= b + 3.0 * e.std_error);
        let ratio = est[1].1.fraction / est[0].1.fraction;
        let ratio_ok = ratio.is_finite() && (3.0..=5.5).contains(&ratio);
        let parts: Vec<String> = est
            .iter()
            .map(|(a, e, b)| format!("alpha {a}: {}/{trials} not cycle-free (bound {b:.2e})", e.not_cycle_free))
            .collect();
        Check::new(bound_ok && ratio_ok, format!("{}; ratio {ratio:.3}, band [3, 5.5]", parts.join(", ")))
            .stat("p_low", est[0].1.fraction)
            .stat("p_high", est[1].1.fraction)
            .stat("ratio", if ratio.is_finite() { ratio } else { -1.0 })
    })
}
