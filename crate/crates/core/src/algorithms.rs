//! Streaming Max-DICUT estimators.
//!
//! - [`RandomOrderEstimator`] / [`RandomOrderDicut`]: one pass over a
//!   randomly ordered stream, sampling the first `k` edges.
//! - [`TwoPassDicut`]: reservoir sample in pass 1, endpoint degrees in pass 2;
//!   works for any order.
//! - [`BoundedDegreeEstimator`] / [`BoundedDegreeDicut`]: one pass over any
//!   order of a graph with maximum degree `D`, sampling vertices by a 4-wise
//!   independent hash for every guess `m_hat = 2^b` of the edge count.
//!
//! All of them end in [`oblivious_estimate`] on a (scaled) density matrix.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    oblivious_estimate, sub_density_matrix, BiasProfile, BiasThresholds, Edge, MatrixEstimate, ObliviousScheme,
    Vertex,
};
use crate::hashing::{sample_hash, HashError, KwiseHash};
use crate::seeding::{derive_seed, Role};
use crate::stream::{
    run_single_pass, run_two_pass, EdgeStream, Reservoir, SpaceMeter, SpaceUsage, StreamingAlgorithm,
    TwoPassAlgorithm,
};

/// Upper end of the admissible `eps` range: the measured approximation floor
/// of the default scheme.
pub const MAX_EPS: f64 = 0.45;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("eps = {0} must lie in (0, {MAX_EPS})")]
    Eps(f64),
    #[error("eps' = {0} must be positive")]
    EpsPrime(f64),
    #[error("need at least 2 bias classes, got {0}")]
    Classes(usize),
    #[error("degree bound must be positive")]
    Degree,
    #[error("sample size must be positive")]
    SampleSize,
}

/// `eps' = eps / (8 l^2)`.
pub fn eps_prime(eps: f64, ell: usize) -> f64 {
    eps / (8.0 * (ell * ell) as f64)
}

/// `k = ceil(8 (1 + eps'/2) / eps'^2 * ln(6 l^2))`.
///
/// Each of the `2 l^2` one-sided tails of the sampled matrix entries is at
/// most `exp(-eps'^2 k / (8 (1 + eps'/2)))`; this `k` makes each at most
/// `1 / (6 l^2)`, for a total failure probability of at most 1/3.
pub fn sample_size(eps_prime: f64, ell: usize) -> u64 {
    let l2 = (ell * ell) as f64;
    (8.0 * (1.0 + eps_prime / 2.0) / (eps_prime * eps_prime) * (6.0 * l2).ln()).ceil() as u64
}

/// `m_0 = max(2k, ceil((2 + eps') k / eps'))`.
pub fn small_cutoff(eps_prime: f64, k: u64) -> u64 {
    (2 * k).max(((2.0 + eps_prime) * k as f64 / eps_prime).ceil() as u64)
}

/// `C_1 = ceil(10 sqrt(2) l / eps')`, so that `2 / (eps'^2 C_1^2) <= 1 / (100 l^2)`.
pub fn c1(eps_prime: f64, ell: usize) -> u64 {
    (10.0 * 2f64.sqrt() * ell as f64 / eps_prime).ceil() as u64
}

/// Parameters of the random-order and two-pass algorithms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmParams {
    pub eps: f64,
    pub ell: usize,
    pub eps_prime: f64,
    pub k: u64,
    pub m0: u64,
}

impl AlgorithmParams {
    pub fn new(eps: f64, ell: usize) -> Result<Self, ParamError> {
        if !(eps > 0.0 && eps < MAX_EPS) {
            return Err(ParamError::Eps(eps));
        }
        let mut p = Self::from_eps_prime(eps_prime(eps, ell), ell)?;
        p.eps = eps;
        Ok(p)
    }

    pub fn for_scheme(eps: f64, scheme: &ObliviousScheme) -> Result<Self, ParamError> {
        Self::new(eps, scheme.len())
    }

    /// Parameters for a given matrix accuracy `eps'`, with `eps = 8 l^2 eps'`.
    pub fn from_eps_prime(eps_prime: f64, ell: usize) -> Result<Self, ParamError> {
        if ell < 2 {
            return Err(ParamError::Classes(ell));
        }
        if !(eps_prime > 0.0) || !eps_prime.is_finite() {
            return Err(ParamError::EpsPrime(eps_prime));
        }
        let k = sample_size(eps_prime, ell);
        Ok(AlgorithmParams { eps: 8.0 * (ell * ell) as f64 * eps_prime, ell, eps_prime, k, m0: small_cutoff(eps_prime, k) })
    }

    pub fn with_k(mut self, k: u64) -> Self {
        self.k = k;
        self
    }

    pub fn with_m0(mut self, m0: u64) -> Self {
        self.m0 = m0;
        self
    }

    /// `2k + 2 m_0`, the tracked-vertex ceiling of both algorithms.
    pub fn tracked_vertex_bound(&self) -> u64 {
        2 * self.k + 2 * self.m0
    }
}

/// Parameters of the bounded-degree algorithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedDegreeParams {
    pub eps: f64,
    pub ell: usize,
    pub eps_prime: f64,
    pub d: u64,
    pub c1: u64,
    /// Per-branch sampling rate parameter, `C_1 sqrt(D)` unless overridden.
    pub k: f64,
    /// Streams shorter than this are answered exactly, `2 C_1^2 D` unless overridden.
    pub exact_cutoff: u64,
}

impl BoundedDegreeParams {
    pub fn new(eps: f64, ell: usize, d: u64) -> Result<Self, ParamError> {
        if !(eps > 0.0 && eps < MAX_EPS) {
            return Err(ParamError::Eps(eps));
        }
        let mut p = Self::from_eps_prime(eps_prime(eps, ell), ell, d)?;
        p.eps = eps;
        Ok(p)
    }

    pub fn from_eps_prime(eps_prime: f64, ell: usize, d: u64) -> Result<Self, ParamError> {
        if ell < 2 {
            return Err(ParamError::Classes(ell));
        }
        if !(eps_prime > 0.0) || !eps_prime.is_finite() {
            return Err(ParamError::EpsPrime(eps_prime));
        }
        if d == 0 {
            return Err(ParamError::Degree);
        }
        let c1 = c1(eps_prime, ell);
        let cf = c1 as f64;
        Ok(BoundedDegreeParams {
            eps: 8.0 * (ell * ell) as f64 * eps_prime,
            ell,
            eps_prime,
            d,
            c1,
            k: cf * (d as f64).sqrt(),
            exact_cutoff: (2.0 * cf * cf * d as f64).min(u64::MAX as f64) as u64,
        })
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    pub fn with_exact_cutoff(mut self, cutoff: u64) -> Self {
        self.exact_cutoff = cutoff;
        self
    }
}

/// A density-matrix estimate with the stream length it was built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateOutput {
    pub matrix: MatrixEstimate,
    pub m: u64,
    /// The matrix was computed from the whole graph rather than a sample.
    pub exact: bool,
}

/// Which path produced a final estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Branch {
    /// Stream below the small-instance cutoff; matrix computed exactly.
    Exact,
    /// Edge sample of the random-order or two-pass algorithm.
    Sampled,
    /// The hash branch with `m_hat = 2^b`.
    Hashed { b: u32 },
    /// Every hash branch failed.
    Unavailable,
}

/// Output record of the three Max-DICUT algorithms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DicutOutput {
    /// `None` when the estimate is unavailable.
    pub estimate: Option<f64>,
    pub m: u64,
    pub space_highwater: SpaceUsage,
    pub branch_used: Branch,
    pub failed_branches: Vec<u32>,
    /// Seeds of the algorithm's own randomness (reservoir or hash seeds).
    pub seeds: Vec<u64>,
    /// The matrix the estimate was computed from.
    #[serde(skip)]
    pub matrix: Option<MatrixEstimate>,
}

/// Profile of every endpoint of `edges`, with degrees counted over `edges`.
fn profile_of(edges: &[Edge]) -> BiasProfile {
    let mut p = BiasProfile::new();
    for e in edges {
        p.track(e.src);
        p.track(e.dst);
    }
    for &e in edges {
        p.record(e);
    }
    p
}

fn exact_matrix(edges: &[Edge], t: &BiasThresholds) -> MatrixEstimate {
    let m = sub_density_matrix(edges, &profile_of(edges), t).expect("all endpoints tracked");
    (&m).into()
}

/// First `cutoff` edges of the stream, dropped once the stream reaches `cutoff`.
#[derive(Clone, Debug)]
struct PrefixBuffer {
    cutoff: u64,
    edges: Option<Vec<Edge>>,
    vertices: HashSet<Vertex>,
}

impl PrefixBuffer {
    fn new(cutoff: u64) -> Self {
        PrefixBuffer { cutoff, edges: Some(Vec::new()), vertices: HashSet::new() }
    }

    /// `m` counts `e`.
    fn step(&mut self, e: Edge, m: u64) {
        if m >= self.cutoff {
            self.edges = None;
            self.vertices = HashSet::new();
        } else if let Some(edges) = &mut self.edges {
            edges.push(e);
            self.vertices.insert(e.src);
            self.vertices.insert(e.dst);
        }
    }

    fn usage(&self) -> SpaceUsage {
        SpaceUsage {
            tracked_vertices: self.vertices.len() as u64,
            stored_edges: self.edges.as_ref().map_or(0, |e| e.len() as u64),
            aux_words: 0,
        }
    }

    /// The whole stream, if it ended below the cutoff.
    fn whole_stream(&self, m: u64) -> Option<&[Edge]> {
        if m < self.cutoff {
            self.edges.as_deref()
        } else {
            None
        }
    }
}

fn add_usage(a: SpaceUsage, b: SpaceUsage) -> SpaceUsage {
    SpaceUsage {
        tracked_vertices: a.tracked_vertices + b.tracked_vertices,
        stored_edges: a.stored_edges + b.stored_edges,
        aux_words: a.aux_words + b.aux_words,
    }
}

/// Snapshot estimator: store the first `k` edges, track their endpoints'
/// degrees over the whole stream, and scale by `m / k`.
///
/// Degrees contributed by the stored prefix itself are counted, so the
/// biases are those of the full graph. If the stream has at most `k` edges
/// the stored edges are the graph and the exact matrix is returned.
#[derive(Clone, Debug)]
pub struct RandomOrderEstimator {
    t: BiasThresholds,
    k: u64,
    prefix: Vec<Edge>,
    profile: BiasProfile,
    prefix_recorded: bool,
    m: u64,
}

impl RandomOrderEstimator {
    pub fn new(t: BiasThresholds, k: u64) -> Self {
        RandomOrderEstimator { t, k, prefix: Vec::new(), profile: BiasProfile::new(), prefix_recorded: false, m: 0 }
    }

    fn step(&mut self, e: Edge) {
        self.m += 1;
        if (self.prefix.len() as u64) < self.k {
            self.prefix.push(e);
            self.profile.track(e.src);
            self.profile.track(e.dst);
            if self.prefix.len() as u64 == self.k {
                self.record_prefix();
            }
        } else {
            self.profile.record(e);
        }
    }

    fn record_prefix(&mut self) {
        for &e in &self.prefix {
            self.profile.record(e);
        }
        self.prefix_recorded = true;
    }

    fn usage(&self) -> SpaceUsage {
        SpaceUsage { tracked_vertices: self.profile.len() as u64, stored_edges: self.prefix.len() as u64, aux_words: 1 }
    }

    fn estimate(mut self) -> EstimateOutput {
        if !self.prefix_recorded {
            self.record_prefix();
        }
        let sub = sub_density_matrix(&self.prefix, &self.profile, &self.t).expect("prefix endpoints are tracked");
        if self.m <= self.k {
            EstimateOutput { matrix: (&sub).into(), m: self.m, exact: true }
        } else {
            EstimateOutput { matrix: sub.scaled(self.m as f64 / self.k as f64), m: self.m, exact: false }
        }
    }
}

impl StreamingAlgorithm for RandomOrderEstimator {
    type Output = EstimateOutput;

    fn process(&mut self, e: Edge, meter: &mut SpaceMeter) {
        self.step(e);
        meter.set(self.usage());
    }

    fn finish(self, _meter: &mut SpaceMeter) -> EstimateOutput {
        self.estimate()
    }
}

pub fn random_order_estimate(s: &EdgeStream, t: &BiasThresholds, k: u64, meter: &mut SpaceMeter) -> EstimateOutput {
    run_single_pass(RandomOrderEstimator::new(t.clone(), k), s, meter)
}

/// One-pass random-order Max-DICUT estimate.
#[derive(Clone, Debug)]
pub struct RandomOrderDicut {
    eps: f64,
    scheme: ObliviousScheme,
    estimator: RandomOrderEstimator,
    buffer: PrefixBuffer,
    m: u64,
}

impl RandomOrderDicut {
    pub fn new(params: &AlgorithmParams, scheme: &ObliviousScheme) -> Self {
        RandomOrderDicut {
            eps: params.eps,
            scheme: scheme.clone(),
            estimator: RandomOrderEstimator::new(scheme.thresholds().clone(), params.k),
            buffer: PrefixBuffer::new(params.m0),
            m: 0,
        }
    }
}

impl StreamingAlgorithm for RandomOrderDicut {
    type Output = DicutOutput;

    fn process(&mut self, e: Edge, meter: &mut SpaceMeter) {
        self.m += 1;
        self.estimator.step(e);
        self.buffer.step(e, self.m);
        let mut usage = add_usage(self.estimator.usage(), self.buffer.usage());
        usage.aux_words += 1;
        meter.set(usage);
    }

    fn finish(self, meter: &mut SpaceMeter) -> DicutOutput {
        let t = self.scheme.thresholds();
        let (matrix, branch) = match self.buffer.whole_stream(self.m) {
            Some(edges) => (exact_matrix(edges, t), Branch::Exact),
            None => (self.estimator.estimate().matrix, Branch::Sampled),
        };
        let estimate = oblivious_estimate(&matrix, &self.scheme, self.m, self.eps).expect("scheme matches thresholds");
        DicutOutput {
            estimate: Some(estimate),
            m: self.m,
            space_highwater: meter.peak(),
            branch_used: branch,
            failed_branches: Vec::new(),
            seeds: Vec::new(),
            matrix: Some(matrix),
        }
    }
}

pub fn random_order_dicut(s: &EdgeStream, params: &AlgorithmParams, scheme: &ObliviousScheme) -> DicutOutput {
    run_single_pass(RandomOrderDicut::new(params, scheme), s, &mut SpaceMeter::new())
}

/// Two-pass Max-DICUT estimate for arbitrary edge order.
#[derive(Clone, Debug)]
pub struct TwoPassDicut {
    eps: f64,
    scheme: ObliviousScheme,
    reservoir: Reservoir<Edge>,
    seed: u64,
    buffer: PrefixBuffer,
    profile: BiasProfile,
    m: u64,
}

impl TwoPassDicut {
    pub fn new(params: &AlgorithmParams, scheme: &ObliviousScheme, seed: u64) -> Self {
        TwoPassDicut {
            eps: params.eps,
            scheme: scheme.clone(),
            reservoir: Reservoir::new(params.k as usize, seed),
            seed,
            buffer: PrefixBuffer::new(params.m0),
            profile: BiasProfile::new(),
            m: 0,
        }
    }

    fn usage(&self) -> SpaceUsage {
        let own = SpaceUsage {
            tracked_vertices: self.profile.len() as u64,
            stored_edges: self.reservoir.items().len() as u64,
            aux_words: 2,
        };
        add_usage(own, self.buffer.usage())
    }

    fn sampling(&self) -> bool {
        self.buffer.whole_stream(self.m).is_none()
    }
}

impl TwoPassAlgorithm for TwoPassDicut {
    type Output = DicutOutput;

    fn pass1(&mut self, e: Edge, meter: &mut SpaceMeter) {
        self.m += 1;
        self.reservoir.step(e);
        self.buffer.step(e, self.m);
        meter.set(self.usage());
    }

    fn between_passes(&mut self, meter: &mut SpaceMeter) {
        if self.sampling() {
            for e in self.reservoir.items() {
                self.profile.track(e.src);
                self.profile.track(e.dst);
            }
        }
        meter.set(self.usage());
    }

    fn pass2(&mut self, e: Edge, _meter: &mut SpaceMeter) {
        self.profile.record(e);
    }

    fn finish(self, meter: &mut SpaceMeter) -> DicutOutput {
        let t = self.scheme.thresholds();
        let (matrix, branch) = match self.buffer.whole_stream(self.m) {
            Some(edges) => (exact_matrix(edges, t), Branch::Exact),
            None => {
                let sample = self.reservoir.items();
                let sub = sub_density_matrix(sample, &self.profile, t).expect("sample endpoints are tracked");
                let scale = if sample.is_empty() { 0.0 } else { self.m as f64 / sample.len() as f64 };
                (sub.scaled(scale), Branch::Sampled)
            }
        };
        let estimate = oblivious_estimate(&matrix, &self.scheme, self.m, self.eps).expect("scheme matches thresholds");
        DicutOutput {
            estimate: Some(estimate),
            m: self.m,
            space_highwater: meter.peak(),
            branch_used: branch,
            failed_branches: Vec::new(),
            seeds: vec![self.seed],
            matrix: Some(matrix),
        }
    }
}

pub fn two_pass_dicut(s: &EdgeStream, params: &AlgorithmParams, scheme: &ObliviousScheme, seed: u64) -> DicutOutput {
    run_two_pass(TwoPassDicut::new(params, scheme, seed), s, &mut SpaceMeter::new())
}

/// Why a bounded-degree branch failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum FailReason {
    /// More than `5 s min(n, 4 m_hat) / m_hat` vertices tracked after edge `at_edge`.
    TrackedCap { at_edge: u64 },
    /// `m < m_hat`.
    TooFewEdges,
    /// `m >= 2 m_hat`.
    TooManyEdges,
    /// `s < 1`: no vertex can pass the hash test.
    EmptyThreshold,
}

/// Outcome of one bounded-degree branch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BoundedOutcome {
    Estimate(EstimateOutput),
    Fail(FailReason),
}

impl BoundedOutcome {
    pub fn is_fail(&self) -> bool {
        matches!(self, BoundedOutcome::Fail(_))
    }
}

/// Hash-sampled estimator for one guess `m_hat` of the edge count.
///
/// A vertex passes when `pi(v) <= s` with `pi: [n] -> [m_hat]` drawn from a
/// 4-wise independent family and `s = k sqrt(m_hat)`. Passing vertices
/// have their degrees tracked from their first arrival on; an edge joins
/// the sample when both endpoints pass. Since `pi` is integral, the test
/// uses `min(floor(s), m_hat)`, which is also the value the scaling uses.
#[derive(Clone, Debug)]
pub struct BoundedDegreeEstimator {
    t: BiasThresholds,
    hash: KwiseHash,
    seed: u64,
    m_hat: u64,
    s: f64,
    s_int: u64,
    cap: f64,
    profile: BiasProfile,
    sample: Vec<Edge>,
    m: u64,
    failed: Option<FailReason>,
}

impl BoundedDegreeEstimator {
    pub fn new(n: usize, t: BiasThresholds, k: f64, m_hat: u64, seed: u64) -> Result<Self, HashError> {
        let hash = sample_hash(n as u64, m_hat, 4, seed)?;
        let s = k * (m_hat as f64).sqrt();
        let s_int = (s.floor().max(0.0) as u64).min(m_hat);
        let cap = 5.0 * s * (n as f64).min(4.0 * m_hat as f64) / m_hat as f64;
        Ok(BoundedDegreeEstimator {
            t,
            hash,
            seed,
            m_hat,
            s,
            s_int,
            cap,
            profile: BiasProfile::new(),
            sample: Vec::new(),
            m: 0,
            failed: None,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.s
    }

    /// `5 s min(n, 4 m_hat) / m_hat`.
    pub fn tracked_cap(&self) -> f64 {
        self.cap
    }

    pub fn m_hat(&self) -> u64 {
        self.m_hat
    }

    fn passes(&self, v: Vertex) -> bool {
        // range values are 0-based, so pi(v) = h(v) + 1
        self.hash.eval_unchecked(v as u64) < self.s_int
    }

    fn step(&mut self, e: Edge) {
        self.m += 1;
        if self.failed.is_some() {
            return;
        }
        let (a, b) = (self.passes(e.src), self.passes(e.dst));
        if a {
            self.profile.track(e.src);
        }
        if b {
            self.profile.track(e.dst);
        }
        self.profile.record(e);
        if a && b {
            self.sample.push(e);
        }
        if self.profile.len() as f64 > self.cap {
            self.failed = Some(FailReason::TrackedCap { at_edge: self.m });
            self.profile = BiasProfile::new();
            self.sample = Vec::new();
        }
    }

    fn usage(&self) -> SpaceUsage {
        SpaceUsage {
            tracked_vertices: self.profile.len() as u64,
            stored_edges: self.sample.len() as u64,
            aux_words: self.hash.independence() as u64 + 2,
        }
    }

    fn outcome(self) -> BoundedOutcome {
        if let Some(reason) = self.failed {
            return BoundedOutcome::Fail(reason);
        }
        if self.m < self.m_hat {
            return BoundedOutcome::Fail(FailReason::TooFewEdges);
        }
        if self.m >= 2 * self.m_hat {
            return BoundedOutcome::Fail(FailReason::TooManyEdges);
        }
        if self.s_int == 0 {
            return BoundedOutcome::Fail(FailReason::EmptyThreshold);
        }
        let sub = sub_density_matrix(&self.sample, &self.profile, &self.t).expect("sample endpoints are tracked");
        // m / mu with mu = m s^2 / m_hat^2
        let ratio = self.m_hat as f64 / self.s_int as f64;
        let exact = self.s_int == self.m_hat;
        BoundedOutcome::Estimate(EstimateOutput { matrix: sub.scaled(ratio * ratio), m: self.m, exact })
    }
}

impl StreamingAlgorithm for BoundedDegreeEstimator {
    type Output = BoundedOutcome;

    fn process(&mut self, e: Edge, meter: &mut SpaceMeter) {
        self.step(e);
        meter.set(self.usage());
    }

    fn finish(self, _meter: &mut SpaceMeter) -> BoundedOutcome {
        self.outcome()
    }
}

pub fn bounded_degree_estimate(
    s: &EdgeStream,
    t: &BiasThresholds,
    k: f64,
    m_hat: u64,
    seed: u64,
    meter: &mut SpaceMeter,
) -> Result<BoundedOutcome, HashError> {
    Ok(run_single_pass(BoundedDegreeEstimator::new(s.n(), t.clone(), k, m_hat, seed)?, s, meter))
}

/// `floor(log2(n D / 2))`, at least 0.
pub fn max_branch(n: usize, d: u64) -> u32 {
    let nd2 = (n as u128 * d as u128 / 2).max(1);
    127 - nd2.leading_zeros()
}

/// Bounded-degree Max-DICUT estimate: every branch `m_hat = 2^b` for
/// `b = 0..=floor(log2(n D / 2))` runs side by side on the same pass.
#[derive(Clone, Debug)]
pub struct BoundedDegreeDicut {
    eps: f64,
    scheme: ObliviousScheme,
    branches: Vec<BoundedDegreeEstimator>,
    buffer: PrefixBuffer,
    m: u64,
}

impl BoundedDegreeDicut {
    /// Branch `b` draws its hash from `derive_seed(master_seed, Role::Hash, b)`.
    pub fn new(n: usize, params: &BoundedDegreeParams, scheme: &ObliviousScheme, master_seed: u64) -> Self {
        let t = scheme.thresholds();
        let branches = (0..=max_branch(n, params.d))
            .map(|b| {
                let seed = derive_seed(master_seed, Role::Hash, b as u64);
                BoundedDegreeEstimator::new(n, t.clone(), params.k, 1u64 << b, seed).expect("power-of-two range")
            })
            .collect();
        BoundedDegreeDicut {
            eps: params.eps,
            scheme: scheme.clone(),
            branches,
            buffer: PrefixBuffer::new(params.exact_cutoff),
            m: 0,
        }
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }
}

impl StreamingAlgorithm for BoundedDegreeDicut {
    type Output = DicutOutput;

    fn process(&mut self, e: Edge, meter: &mut SpaceMeter) {
        self.m += 1;
        self.buffer.step(e, self.m);
        let mut usage = self.buffer.usage();
        for br in &mut self.branches {
            br.step(e);
            usage = add_usage(usage, br.usage());
        }
        usage.aux_words += 1;
        meter.set(usage);
    }

    fn finish(self, meter: &mut SpaceMeter) -> DicutOutput {
        let seeds: Vec<u64> = self.branches.iter().map(|b| b.seed).collect();
        let whole = self.buffer.whole_stream(self.m).map(|edges| exact_matrix(edges, self.scheme.thresholds()));
        let mut failed = Vec::new();
        let mut chosen = None;
        for (b, br) in self.branches.into_iter().enumerate() {
            match br.outcome() {
                BoundedOutcome::Fail(_) => failed.push(b as u32),
                BoundedOutcome::Estimate(est) => chosen = Some((b as u32, est.matrix)),
            }
        }
        let (matrix, branch) = match (whole, chosen) {
            (Some(m), _) => (Some(m), Branch::Exact),
            (None, Some((b, m))) => (Some(m), Branch::Hashed { b }),
            (None, None) => (None, Branch::Unavailable),
        };
        let estimate = matrix
            .as_ref()
            .map(|n| oblivious_estimate(n, &self.scheme, self.m, self.eps).expect("scheme matches thresholds"))
            // the hashed N is rescaled by m / mu, so its total can exceed m; no cut is larger than m
            .map(|v| v.min(self.m as f64));
        DicutOutput {
            estimate,
            m: self.m,
            space_highwater: meter.peak(),
            branch_used: branch,
            failed_branches: failed,
            seeds,
            matrix,
        }
    }
}

pub fn bounded_degree_dicut(
    s: &EdgeStream,
    params: &BoundedDegreeParams,
    scheme: &ObliviousScheme,
    master_seed: u64,
) -> DicutOutput {
    run_single_pass(BoundedDegreeDicut::new(s.n(), params, scheme, master_seed), s, &mut SpaceMeter::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{bounded_degree_graph, random_multigraph};
    use crate::graph::{density_matrix, DirectedMultigraph};
    use crate::seeding::rng_from_seed;

    fn three() -> BiasThresholds {
        BiasThresholds::three_way()
    }

    #[test]
    fn formulas() {
        // eps' = 0.05, l = 3: 8 * 1.025 / 0.0025 * ln 54
        assert_eq!(sample_size(0.05, 3), 13084);
        assert_eq!(small_cutoff(0.05, 13084), 536444);
        assert_eq!(c1(0.1, 3), 425);
        let p = AlgorithmParams::new(0.1, 3).unwrap();
        assert!((p.eps_prime - 0.1 / 72.0).abs() < 1e-15);
        assert!(p.m0 >= 2 * p.k);
        assert!(AlgorithmParams::new(0.0, 3).is_err());
        assert!(AlgorithmParams::new(0.5, 3).is_err());
        assert!(AlgorithmParams::from_eps_prime(0.05, 1).is_err());
        let b = BoundedDegreeParams::from_eps_prime(0.1, 3, 4).unwrap();
        assert_eq!(b.c1, 425);
        assert_eq!(b.k, 850.0);
        assert_eq!(b.exact_cutoff, 2 * 425 * 425 * 4);
    }

    #[test]
    fn max_branch_values() {
        assert_eq!(max_branch(5000, 4), 13);
        assert_eq!(max_branch(1, 1), 0);
        assert_eq!(max_branch(14, 3), 4);
    }

    #[test]
    fn estimator_exact_when_k_covers_stream() {
        let g = random_multigraph(10, 30, &mut rng_from_seed(1));
        let mut meter = SpaceMeter::new();
        let out = random_order_estimate(&EdgeStream::permuted(&g, 3), &three(), 30, &mut meter);
        assert!(out.exact);
        assert_eq!(out.matrix, (&density_matrix(&g, &three())).into());
        let out = random_order_estimate(&EdgeStream::permuted(&g, 3), &three(), 100, &mut meter);
        assert_eq!(out.matrix, (&density_matrix(&g, &three())).into());
        let empty = DirectedMultigraph::from_pairs(3, &[]).unwrap();
        let out = random_order_estimate(&EdgeStream::as_given(&empty), &three(), 5, &mut meter);
        assert_eq!(out.matrix.total(), 0.0);
    }

    #[test]
    fn estimator_counts_prefix_degrees() {
        // vertex 2 first appears in the second prefix edge but also ends the first
        let g = DirectedMultigraph::from_pairs(4, &[(0, 2), (2, 1), (3, 2), (3, 1)]).unwrap();
        let mut meter = SpaceMeter::new();
        let out = random_order_estimate(&EdgeStream::as_given(&g), &three(), 2, &mut meter);
        // biases: 0 -> 1, 1 -> -1, 2 -> -1/3; sampled edges (0,2) and (2,1), scale 2
        assert_eq!(out.matrix.get(2, 0), 2.0);
        assert_eq!(out.matrix.get(0, 0), 2.0);
        assert_eq!(out.matrix.total(), 4.0);
        assert_eq!(meter.peak().stored_edges, 2);
        assert_eq!(meter.peak().tracked_vertices, 3);
    }

    #[test]
    fn dicut_small_branch_is_exact() {
        let scheme = ObliviousScheme::default_scheme();
        let params = AlgorithmParams::for_scheme(0.1, &scheme).unwrap();
        let g = random_multigraph(8, 20, &mut rng_from_seed(2));
        let m = density_matrix(&g, scheme.thresholds());
        let want = oblivious_estimate(&(&m).into(), &scheme, 20, 0.1).unwrap();
        let out = random_order_dicut(&EdgeStream::permuted(&g, 1), &params, &scheme);
        assert_eq!(out.branch_used, Branch::Exact);
        assert!((out.estimate.unwrap() - want).abs() < 1e-12);
        let out = two_pass_dicut(&EdgeStream::sorted_by_source(&g), &params, &scheme, 9);
        assert!((out.estimate.unwrap() - want).abs() < 1e-12);
        let empty = DirectedMultigraph::from_pairs(3, &[]).unwrap();
        assert_eq!(random_order_dicut(&EdgeStream::as_given(&empty), &params, &scheme).estimate, Some(0.0));
        assert_eq!(two_pass_dicut(&EdgeStream::as_given(&empty), &params, &scheme, 1).estimate, Some(0.0));
    }

    #[test]
    fn two_pass_sampled_scale() {
        let g = random_multigraph(20, 100, &mut rng_from_seed(4));
        let scheme = ObliviousScheme::default_scheme();
        let params = AlgorithmParams::for_scheme(0.1, &scheme).unwrap().with_k(10).with_m0(0);
        let mut meter = SpaceMeter::new();
        let out = run_two_pass(TwoPassDicut::new(&params, &scheme, 5), &EdgeStream::as_given(&g), &mut meter);
        assert_eq!(out.branch_used, Branch::Sampled);
        assert!((out.matrix.unwrap().total() - 100.0).abs() < 1e-9);
        assert!(meter.peak().tracked_vertices <= 20);
        assert_eq!(meter.peak().stored_edges, 10);
    }

    #[test]
    fn bounded_fails_outside_range() {
        let g = random_multigraph(50, 16, &mut rng_from_seed(5));
        let s = EdgeStream::as_given(&g);
        let mut meter = SpaceMeter::new();
        let low = bounded_degree_estimate(&s, &three(), 100.0, 32, 1, &mut meter).unwrap();
        assert_eq!(low, BoundedOutcome::Fail(FailReason::TooFewEdges));
        let high = bounded_degree_estimate(&s, &three(), 100.0, 8, 1, &mut meter).unwrap();
        assert_eq!(high, BoundedOutcome::Fail(FailReason::TooManyEdges));
    }

    #[test]
    fn bounded_full_threshold_is_exact() {
        let g = random_multigraph(50, 20, &mut rng_from_seed(6));
        let s = EdgeStream::as_given(&g);
        let mut meter = SpaceMeter::new();
        match bounded_degree_estimate(&s, &three(), 100.0, 16, 1, &mut meter).unwrap() {
            BoundedOutcome::Estimate(e) => {
                assert!(e.exact);
                assert_eq!(e.matrix, (&density_matrix(&g, &three())).into());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bounded_cap_triggers_fail() {
        // s = sqrt(16) / 4 * 4 = 4 of 16: cap = 5 * 4 * min(200, 64) / 16 = 80
        let g = random_multigraph(200, 20, &mut rng_from_seed(7));
        let mut est = BoundedDegreeEstimator::new(200, three(), 1.0, 16, 3).unwrap();
        assert_eq!(est.tracked_cap(), 80.0);
        est.cap = 2.0;
        let mut meter = SpaceMeter::new();
        for &e in g.edges() {
            est.process(e, &mut meter);
        }
        assert!(matches!(est.finish(&mut meter), BoundedOutcome::Fail(FailReason::TrackedCap { .. })));
    }

    #[test]
    fn bounded_dicut_exact_and_branches() {
        let scheme = ObliviousScheme::default_scheme();
        let single = DirectedMultigraph::from_pairs(2, &[(0, 1)]).unwrap();
        let params = BoundedDegreeParams::new(0.1, scheme.len(), 1).unwrap();
        let out = bounded_degree_dicut(&EdgeStream::as_given(&single), &params, &scheme, 1);
        assert_eq!(out.branch_used, Branch::Exact);
        assert!((out.estimate.unwrap() - (1.0 - 0.1 / 8.0)).abs() < 1e-12);

        let g = bounded_degree_graph(400, 3, &mut rng_from_seed(8));
        let params = BoundedDegreeParams::new(0.1, scheme.len(), 3).unwrap().with_exact_cutoff(0);
        let out = bounded_degree_dicut(&EdgeStream::as_given(&g), &params, &scheme, 2);
        let b = (g.m() as f64).log2().floor() as u32;
        assert_eq!(out.branch_used, Branch::Hashed { b });
        assert_eq!(out.seeds.len(), max_branch(400, 3) as usize + 1);
        assert!(out.failed_branches.iter().all(|&f| f != b));
        assert!(out.estimate.unwrap() <= g.m() as f64);
    }
}
