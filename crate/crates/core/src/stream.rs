//! Edge streams, reservoir sampling, logical space accounting and the
//! one/two-pass drivers.
//!
//! The driver owns the stream and hands each symbol to the algorithm exactly
//! once per pass, in order. Algorithms never see the stream object itself.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::graph::generate::sorted_by_source;
use crate::graph::{DirectedMultigraph, Edge};
use crate::seeding::{rng_from_seed, Rng};

/// How the edges of a stream were ordered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "seed")]
pub enum StreamOrder {
    AsGiven,
    Random(u64),
    SortedBySource,
}

/// A materialized edge sequence over `n` vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeStream {
    n: usize,
    order: StreamOrder,
    edges: Vec<Edge>,
}

impl EdgeStream {
    pub fn as_given(g: &DirectedMultigraph) -> Self {
        EdgeStream { n: g.n(), order: StreamOrder::AsGiven, edges: g.edges().to_vec() }
    }

    /// Uniformly random order, determined by `seed` (Fisher-Yates).
    pub fn permuted(g: &DirectedMultigraph, seed: u64) -> Self {
        let mut edges = g.edges().to_vec();
        edges.shuffle(&mut rng_from_seed(seed));
        EdgeStream { n: g.n(), order: StreamOrder::Random(seed), edges }
    }

    /// All out-edges of vertex 0 first, then vertex 1, and so on.
    pub fn sorted_by_source(g: &DirectedMultigraph) -> Self {
        EdgeStream { n: g.n(), order: StreamOrder::SortedBySource, edges: sorted_by_source(g) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn order(&self) -> StreamOrder {
        self.order
    }

    /// The symbols in stream order.
    pub fn symbols(&self) -> &[Edge] {
        &self.edges
    }
}

/// `permute_stream(G, seed)`.
pub fn permute_stream(g: &DirectedMultigraph, seed: u64) -> EdgeStream {
    EdgeStream::permuted(g, seed)
}

/// Algorithm R: a uniform sample of `k` items from a stream of unknown length.
#[derive(Clone, Debug)]
pub struct Reservoir<T> {
    capacity: usize,
    items: Vec<T>,
    seen: u64,
    rng: Rng,
}

impl<T> Reservoir<T> {
    pub fn new(capacity: usize, seed: u64) -> Self {
        Reservoir { capacity, items: Vec::with_capacity(capacity.min(1 << 16)), seen: 0, rng: rng_from_seed(seed) }
    }

    /// Offer the next item. The first `k` items are kept; item `i > k` replaces
    /// a uniformly random slot with probability `k / i`.
    pub fn step(&mut self, item: T) {
        self.seen += 1;
        if self.items.len() < self.capacity {
            self.items.push(item);
            return;
        }
        let j = self.rng.gen_range(0..self.seen);
        if (j as usize) < self.capacity {
            self.items[j as usize] = item;
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn items(&self) -> &[T] {
        &self.items
    }

    pub fn into_items(self) -> Vec<T> {
        self.items
    }
}

/// Item counts held by an algorithm at one moment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceUsage {
    pub tracked_vertices: u64,
    pub stored_edges: u64,
    pub aux_words: u64,
}

/// Current and high-water logical space usage.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceMeter {
    current: SpaceUsage,
    peak: SpaceUsage,
}

impl SpaceMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_tracked_vertices(&mut self, v: u64) {
        self.current.tracked_vertices = v;
        self.peak.tracked_vertices = self.peak.tracked_vertices.max(v);
    }

    pub fn set_stored_edges(&mut self, v: u64) {
        self.current.stored_edges = v;
        self.peak.stored_edges = self.peak.stored_edges.max(v);
    }

    pub fn set_aux_words(&mut self, v: u64) {
        self.current.aux_words = v;
        self.peak.aux_words = self.peak.aux_words.max(v);
    }

    /// Set all three counters at once.
    pub fn set(&mut self, usage: SpaceUsage) {
        self.set_tracked_vertices(usage.tracked_vertices);
        self.set_stored_edges(usage.stored_edges);
        self.set_aux_words(usage.aux_words);
    }

    pub fn current(&self) -> SpaceUsage {
        self.current
    }

    pub fn peak(&self) -> SpaceUsage {
        self.peak
    }
}

/// A one-pass state machine over edge symbols.
pub trait StreamingAlgorithm {
    type Output;

    fn process(&mut self, e: Edge, meter: &mut SpaceMeter);

    fn finish(self, meter: &mut SpaceMeter) -> Self::Output;
}

/// A two-pass state machine. Both passes see the same symbol sequence.
pub trait TwoPassAlgorithm {
    type Output;

    fn pass1(&mut self, e: Edge, meter: &mut SpaceMeter);

    fn between_passes(&mut self, meter: &mut SpaceMeter);

    fn pass2(&mut self, e: Edge, meter: &mut SpaceMeter);

    fn finish(self, meter: &mut SpaceMeter) -> Self::Output;
}

pub fn run_single_pass<A: StreamingAlgorithm>(mut alg: A, s: &EdgeStream, meter: &mut SpaceMeter) -> A::Output {
    for &e in s.symbols() {
        alg.process(e, meter);
    }
    alg.finish(meter)
}

pub fn run_two_pass<A: TwoPassAlgorithm>(mut alg: A, s: &EdgeStream, meter: &mut SpaceMeter) -> A::Output {
    for &e in s.symbols() {
        alg.pass1(e, meter);
    }
    alg.between_passes(meter);
    for &e in s.symbols() {
        alg.pass2(e, meter);
    }
    alg.finish(meter)
}

/// Reservoir sampling of edges as a streaming algorithm.
#[derive(Clone, Debug)]
pub struct EdgeReservoir(pub Reservoir<Edge>);

impl EdgeReservoir {
    pub fn new(k: usize, seed: u64) -> Self {
        EdgeReservoir(Reservoir::new(k, seed))
    }
}

impl StreamingAlgorithm for EdgeReservoir {
    type Output = Vec<Edge>;

    fn process(&mut self, e: Edge, meter: &mut SpaceMeter) {
        self.0.step(e);
        meter.set_stored_edges(self.0.items().len() as u64);
    }

    fn finish(self, _meter: &mut SpaceMeter) -> Vec<Edge> {
        self.0.into_items()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::random_multigraph;
    use std::collections::HashMap;

    struct Count(u64);

    impl StreamingAlgorithm for Count {
        type Output = u64;
        fn process(&mut self, _e: Edge, _meter: &mut SpaceMeter) {
            self.0 += 1;
        }
        fn finish(self, _meter: &mut SpaceMeter) -> u64 {
            self.0
        }
    }

    /// Records every symbol it is shown.
    #[derive(Default)]
    struct Spy {
        first: Vec<Edge>,
        second: Vec<Edge>,
        between: usize,
    }

    impl StreamingAlgorithm for Spy {
        type Output = Vec<Edge>;
        fn process(&mut self, e: Edge, _meter: &mut SpaceMeter) {
            self.first.push(e);
        }
        fn finish(self, _meter: &mut SpaceMeter) -> Vec<Edge> {
            self.first
        }
    }

    impl TwoPassAlgorithm for Spy {
        type Output = Spy;
        fn pass1(&mut self, e: Edge, _meter: &mut SpaceMeter) {
            assert_eq!(self.between, 0);
            self.first.push(e);
        }
        fn between_passes(&mut self, _meter: &mut SpaceMeter) {
            self.between += 1;
        }
        fn pass2(&mut self, e: Edge, _meter: &mut SpaceMeter) {
            assert_eq!(self.between, 1);
            self.second.push(e);
        }
        fn finish(self, _meter: &mut SpaceMeter) -> Spy {
            self
        }
    }

    /// Pass 1 reservoir, pass 2 degrees of the sampled endpoints.
    struct SampledDegrees {
        res: Reservoir<Edge>,
        profile: crate::graph::BiasProfile,
    }

    impl TwoPassAlgorithm for SampledDegrees {
        type Output = crate::graph::BiasProfile;
        fn pass1(&mut self, e: Edge, _meter: &mut SpaceMeter) {
            self.res.step(e);
        }
        fn between_passes(&mut self, _meter: &mut SpaceMeter) {
            for e in self.res.items() {
                self.profile.track(e.src);
                self.profile.track(e.dst);
            }
        }
        fn pass2(&mut self, e: Edge, _meter: &mut SpaceMeter) {
            self.profile.record(e);
        }
        fn finish(self, _meter: &mut SpaceMeter) -> crate::graph::BiasProfile {
            self.profile
        }
    }

    fn graph(m: usize) -> DirectedMultigraph {
        random_multigraph(6, m, &mut rng_from_seed(m as u64))
    }

    #[test]
    fn permute_small_cases() {
        let g = graph(1);
        assert_eq!(permute_stream(&g, 99).symbols(), g.edges());
        assert!(permute_stream(&graph(0), 5).is_empty());
    }

    #[test]
    fn permutation_is_deterministic() {
        let g = graph(30);
        assert_eq!(permute_stream(&g, 4), permute_stream(&g, 4));
        assert_ne!(permute_stream(&g, 4).symbols(), permute_stream(&g, 5).symbols());
        let mut a = permute_stream(&g, 4).symbols().to_vec();
        let mut b = g.edges().to_vec();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn all_six_orders_equally_likely() {
        let g = DirectedMultigraph::from_pairs(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let trials = 60_000u64;
        let mut freq: HashMap<Vec<Edge>, u64> = HashMap::new();
        for seed in 0..trials {
            *freq.entry(permute_stream(&g, seed).symbols().to_vec()).or_default() += 1;
        }
        assert_eq!(freq.len(), 6);
        for (order, &c) in &freq {
            let f = c as f64 / trials as f64;
            assert!((f - 1.0 / 6.0).abs() <= 0.01, "{order:?}: {f}");
        }
    }

    #[test]
    fn reservoir_keeps_short_streams() {
        let mut r = Reservoir::new(5, 1);
        (0..5).for_each(|i| r.step(i));
        assert_eq!(r.items(), &[0, 1, 2, 3, 4]);
        let mut r = Reservoir::new(5, 1);
        (0..3).for_each(|i| r.step(i));
        assert_eq!(r.items(), &[0, 1, 2]);
        assert_eq!(r.seen(), 3);
    }

    #[test]
    fn reservoir_single_slot_frequency() {
        let trials = 100_000;
        let mut counts = [0u32; 5];
        for t in 0..trials {
            let mut r = Reservoir::new(1, t);
            (0..5).for_each(|i| r.step(i));
            counts[r.items()[0]] += 1;
        }
        for c in counts {
            assert!((c as f64 / trials as f64 - 0.2).abs() <= 0.01, "{counts:?}");
        }
    }

    #[test]
    fn counting_algorithm() {
        let mut meter = SpaceMeter::new();
        assert_eq!(run_single_pass(Count(0), &EdgeStream::as_given(&graph(7)), &mut meter), 7);
        assert_eq!(run_single_pass(Count(0), &EdgeStream::as_given(&graph(0)), &mut meter), 0);
    }

    #[test]
    fn reservoir_as_algorithm() {
        let mut meter = SpaceMeter::new();
        let out = run_single_pass(EdgeReservoir::new(3, 8), &permute_stream(&graph(10), 2), &mut meter);
        assert_eq!(out.len(), 3);
        assert_eq!(meter.peak().stored_edges, 3);
    }

    #[test]
    fn spy_sees_each_symbol_once_in_order() {
        let s = permute_stream(&graph(25), 11);
        let seen = run_single_pass(Spy::default(), &s, &mut SpaceMeter::new());
        assert_eq!(seen, s.symbols());
    }

    #[test]
    fn two_passes_share_the_order() {
        let s = permute_stream(&graph(25), 12);
        let spy: Spy = run_two_pass(Spy::default(), &s, &mut SpaceMeter::new());
        assert_eq!(spy.first, spy.second);
        assert_eq!(spy.first, s.symbols());
        let empty: Spy = run_two_pass(Spy::default(), &EdgeStream::as_given(&graph(0)), &mut SpaceMeter::new());
        assert!(empty.first.is_empty() && empty.second.is_empty());
    }

    #[test]
    fn two_pass_sampled_degrees_match_graph() {
        let g = random_multigraph(20, 80, &mut rng_from_seed(3));
        let alg = SampledDegrees { res: Reservoir::new(10, 4), profile: Default::default() };
        let profile = run_two_pass(alg, &EdgeStream::sorted_by_source(&g), &mut SpaceMeter::new());
        let deg = g.degrees();
        assert!(!profile.is_empty());
        for v in profile.vertices() {
            assert_eq!(profile.degrees(v).unwrap(), deg[v as usize]);
        }
    }

    #[test]
    fn meter_keeps_high_water() {
        let mut m = SpaceMeter::new();
        m.set_tracked_vertices(5);
        m.set_tracked_vertices(2);
        m.set_aux_words(1);
        assert_eq!(m.current().tracked_vertices, 2);
        assert_eq!(m.peak(), SpaceUsage { tracked_vertices: 5, stored_edges: 0, aux_words: 1 });
    }
}
