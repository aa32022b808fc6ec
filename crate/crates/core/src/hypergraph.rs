//! Random k-hypergraphs, their vertex-hyperedge incidence graphs, and the
//! brute-force quantities built on them.
//!
//! Hyperedges are ordered tuples of distinct vertices; incidence and
//! component structure ignore the order. Hypergraph file: header `n k m`,
//! then `m` lines of `k` 1-indexed vertices.

use std::fmt::Write as _;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seeding::{derive_seed, rng_from_seed, Role};

/// Default cap on the number of labellings `q^(k m)` enumerated by
/// [`count_s_vectors`].
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 1 << 24;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum HypergraphError {
    #[error("arity k = {k} must be in 1..=n = {n}")]
    Arity { k: usize, n: usize },
    #[error("hyperedge {index}: {msg}")]
    BadEdge { index: usize, msg: String },
    #[error("q^(k m) = {q}^({k}*{m}) exceeds the enumeration limit {limit}")]
    TooLarge { q: u32, k: usize, m: usize, limit: u64 },
    #[error("vector has length {got}, expected {want}, with entries below q")]
    BadVector { got: usize, want: usize },
    #[error("support size {ell} must be in 1..=n = {n}")]
    Support { ell: usize, n: usize },
    #[error("q = {0} must be at least 2")]
    Alphabet(u32),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    k: usize,
    edges: Vec<Vec<u32>>,
}

impl Hypergraph {
    pub fn new(n: usize, k: usize, edges: Vec<Vec<u32>>) -> Result<Self, HypergraphError> {
        if k == 0 || k > n {
            return Err(HypergraphError::Arity { k, n });
        }
        for (index, e) in edges.iter().enumerate() {
            let bad = |msg: &str| HypergraphError::BadEdge { index, msg: msg.into() };
            if e.len() != k {
                return Err(bad("wrong arity"));
            }
            if e.iter().any(|&v| v as usize >= n) {
                return Err(bad("vertex out of range"));
            }
            if (1..k).any(|i| e[..i].contains(&e[i])) {
                return Err(bad("repeated vertex"));
            }
        }
        Ok(Hypergraph { n, k, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }

    pub fn incidence(&self) -> IncidenceGraph {
        IncidenceGraph::new(self)
    }
}

/// `m` independent uniform tuples of `k` distinct vertices from `[n]`.
pub fn sample_hypergraph(n: usize, k: usize, m: usize, seed: u64) -> Result<Hypergraph, HypergraphError> {
    if k == 0 || k > n {
        return Err(HypergraphError::Arity { k, n });
    }
    let mut rng = rng_from_seed(seed);
    let mut perm: Vec<u32> = (0..n as u32).collect();
    let edges = (0..m)
        .map(|_| {
            for j in 0..k {
                let r = rng.gen_range(j..n);
                perm.swap(j, r);
            }
            perm[..k].to_vec()
        })
        .collect();
    Ok(Hypergraph { n, k, edges })
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(size: usize) -> Self {
        UnionFind { parent: (0..size as u32).collect() }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    /// Returns `false` if `a` and `b` were already connected.
    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra as usize] = rb;
        true
    }
}

/// Bipartite graph on vertices `[n]` (left) and hyperedges `[m]` (right).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceGraph {
    n: usize,
    left: Vec<Vec<u32>>,
    right: Vec<Vec<u32>>,
}

impl IncidenceGraph {
    pub fn new(g: &Hypergraph) -> Self {
        let mut left = vec![Vec::new(); g.n];
        for (j, e) in g.edges.iter().enumerate() {
            for &v in e {
                left[v as usize].push(j as u32);
            }
        }
        IncidenceGraph { n: g.n, left, right: g.edges.clone() }
    }

    pub fn left_len(&self) -> usize {
        self.n
    }

    pub fn right_len(&self) -> usize {
        self.right.len()
    }

    /// Hyperedges containing vertex `v`.
    pub fn left_neighbors(&self, v: usize) -> &[u32] {
        &self.left[v]
    }

    /// Vertices of hyperedge `j`.
    pub fn right_neighbors(&self, j: usize) -> &[u32] {
        &self.right[j]
    }

    fn union_find(&self) -> (UnionFind, bool) {
        let mut uf = UnionFind::new(self.n + self.right.len());
        let mut acyclic = true;
        for (j, e) in self.right.iter().enumerate() {
            for &v in e {
                acyclic &= uf.union(v, (self.n + j) as u32);
            }
        }
        (uf, acyclic)
    }

    pub fn is_acyclic(&self) -> bool {
        self.union_find().1
    }

    /// Component label of every node, left nodes first, labels in `0..c`
    /// numbered by first appearance.
    pub fn components(&self) -> Vec<usize> {
        let (mut uf, _) = self.union_find();
        let total = self.n + self.right.len();
        let mut label = vec![usize::MAX; total];
        let mut by_root = std::collections::HashMap::new();
        for x in 0..total {
            let root = uf.find(x as u32);
            let next = by_root.len();
            label[x] = *by_root.entry(root).or_insert(next);
        }
        label
    }
}

/// `cf(G)`: the incidence graph has no cycle.
pub fn is_cycle_free(g: &Hypergraph) -> bool {
    g.incidence().is_acyclic()
}

/// Canonical partition of `U` by the components of the incidence graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcPartition {
    pub parts: Vec<Vec<u32>>,
    /// `|U_i|`.
    pub l_type: Vec<usize>,
    /// Number of hyperedges in the component containing `U_i`.
    pub r_type: Vec<usize>,
    pub r_total: usize,
    /// Every part has at least two vertices.
    pub valid: bool,
}

/// Part `i` holds the least vertex of `U` not already in an earlier part,
/// together with every other vertex of `U` in its component.
pub fn cc_part(g: &Hypergraph, u: &[u32]) -> CcPartition {
    let inc = g.incidence();
    let label = inc.components();
    let mut right_count = vec![0usize; label.iter().max().map_or(0, |&c| c + 1)];
    for j in 0..inc.right_len() {
        right_count[label[g.n + j]] += 1;
    }
    let mut u: Vec<u32> = u.to_vec();
    u.sort_unstable();
    u.dedup();
    let mut parts: Vec<Vec<u32>> = Vec::new();
    let mut part_of_comp = std::collections::HashMap::new();
    let mut comps = Vec::new();
    for v in u {
        let c = label[v as usize];
        let idx = *part_of_comp.entry(c).or_insert_with(|| {
            parts.push(Vec::new());
            comps.push(c);
            parts.len() - 1
        });
        parts[idx].push(v);
    }
    let l_type: Vec<usize> = parts.iter().map(Vec::len).collect();
    let r_type: Vec<usize> = comps.iter().map(|&c| right_count[c]).collect();
    CcPartition {
        valid: l_type.iter().all(|&l| l >= 2),
        r_total: r_type.iter().sum(),
        parts,
        l_type,
        r_type,
    }
}

fn check_vector(n: usize, q: u32, v: &[u32]) -> Result<(), HypergraphError> {
    if q < 2 {
        return Err(HypergraphError::Alphabet(q));
    }
    if v.len() != n || v.iter().any(|&x| x >= q) {
        return Err(HypergraphError::BadVector { got: v.len(), want: n });
    }
    Ok(())
}

fn check_enumerable(q: u32, k: usize, m: usize, limit: u64) -> Result<(), HypergraphError> {
    let too_large = HypergraphError::TooLarge { q, k, m, limit };
    let states = (q as u64).checked_pow((k * m) as u32).ok_or(too_large.clone())?;
    if states > limit {
        return Err(too_large);
    }
    Ok(())
}

pub fn count_s_vectors(g: &Hypergraph, q: u32, v: &[u32]) -> Result<u64, HypergraphError> {
    count_s_vectors_with_limit(g, q, v, DEFAULT_ENUMERATION_LIMIT)
}

/// Number of labellings `s = (s(1), .., s(m))`, `s(i) in Z_q^k`, with no
/// block of Hamming weight exactly 1 and `M^T s = v` over `Z_q`, where
/// position `p` of hyperedge `i` contributes `s(i)_p` to vertex `e(i)_p`.
/// Zero when `G` is not cycle-free.
pub fn count_s_vectors_with_limit(g: &Hypergraph, q: u32, v: &[u32], limit: u64) -> Result<u64, HypergraphError> {
    check_vector(g.n, q, v)?;
    check_enumerable(q, g.k, g.m(), limit)?;
    if !is_cycle_free(g) {
        return Ok(0);
    }
    let k = g.k;
    let blocks: Vec<Vec<u32>> = (0..(q as usize).pow(k as u32))
        .map(|mut idx| {
            (0..k)
                .map(|_| {
                    let d = (idx % q as usize) as u32;
                    idx /= q as usize;
                    d
                })
                .collect::<Vec<u32>>()
        })
        .filter(|b| b.iter().filter(|&&x| x != 0).count() != 1)
        .collect();
    let mut acc = vec![0u32; g.n];
    Ok(count_rec(g, q, v, &blocks, 0, &mut acc))
}

fn count_rec(g: &Hypergraph, q: u32, v: &[u32], blocks: &[Vec<u32>], i: usize, acc: &mut [u32]) -> u64 {
    if i == g.m() {
        return (acc == v) as u64;
    }
    let e = &g.edges[i];
    let mut total = 0;
    for b in blocks {
        for (&u, &x) in e.iter().zip(b) {
            acc[u as usize] = (acc[u as usize] + x) % q;
        }
        total += count_rec(g, q, v, blocks, i + 1, acc);
        for (&u, &x) in e.iter().zip(b) {
            acc[u as usize] = (acc[u as usize] + q - x) % q;
        }
    }
    total
}

/// Monte Carlo estimate for one nonzero-value pattern on support `{0..l-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternEstimate {
    pub values: Vec<u32>,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HEstimate {
    /// Largest pattern mean.
    pub value: f64,
    pub patterns: Vec<PatternEstimate>,
    pub samples: usize,
}

/// Non-decreasing sequences of length `ell` over `1..q`.
fn nonzero_multisets(q: u32, ell: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(ell);
    fn rec(q: u32, ell: usize, lo: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == ell {
            out.push(cur.clone());
            return;
        }
        for x in lo..q {
            cur.push(x);
            rec(q, ell, x, cur, out);
            cur.pop();
        }
    }
    rec(q, ell, 1, &mut cur, &mut out);
    out
}

/// Estimate `max_v E_G[count_s_vectors(G, q, v)]` over `G` with `alpha_n`
/// uniform hyperedges, for `v` of support size `ell`.
///
/// The distribution of `G` is invariant under renaming vertices, so only
/// the multiset of nonzero values of `v` matters; one representative per
/// multiset is placed on `{0..ell-1}`. All patterns share the same sampled
/// hypergraphs; sample `i` uses `derive_seed(seed, Role::Instance, i)`.
pub fn estimate_h(
    n: usize,
    k: usize,
    q: u32,
    alpha_n: usize,
    ell: usize,
    samples: usize,
    seed: u64,
) -> Result<HEstimate, HypergraphError> {
    if q < 2 {
        return Err(HypergraphError::Alphabet(q));
    }
    if k == 0 || k > n {
        return Err(HypergraphError::Arity { k, n });
    }
    if ell == 0 || ell > n {
        return Err(HypergraphError::Support { ell, n });
    }
    check_enumerable(q, k, alpha_n, DEFAULT_ENUMERATION_LIMIT)?;
    let patterns = nonzero_multisets(q, ell);
    let vectors: Vec<Vec<u32>> = patterns
        .iter()
        .map(|p| {
            let mut v = vec![0u32; n];
            v[..ell].copy_from_slice(p);
            v
        })
        .collect();
    let per_sample: Vec<Vec<u64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let g = sample_hypergraph(n, k, alpha_n, derive_seed(seed, Role::Instance, i as u64)).expect("valid arity");
            vectors.iter().map(|v| count_s_vectors(&g, q, v).expect("checked above")).collect()
        })
        .collect();
    let s = samples.max(1) as f64;
    let estimates: Vec<PatternEstimate> = patterns
        .into_iter()
        .enumerate()
        .map(|(j, values)| {
            let xs = per_sample.iter().map(|row| row[j] as f64);
            let mean = xs.clone().sum::<f64>() / s;
            let var = if samples > 1 { xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (s - 1.0) } else { 0.0 };
            PatternEstimate { values, mean, std_error: (var / s).sqrt() }
        })
        .collect();
    let value = if samples == 0 { 0.0 } else { estimates.iter().map(|p| p.mean).fold(0.0, f64::max) };
    Ok(HEstimate { value, patterns: estimates, samples })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleEstimate {
    pub trials: usize,
    pub not_cycle_free: usize,
    pub fraction: f64,
    /// `sqrt(p (1 - p) / trials)`.
    pub std_error: f64,
}

/// Fraction of sampled hypergraphs with `alpha_n` edges that are not cycle-free.
/// Trial `i` uses `derive_seed(seed, Role::Instance, i)`.
pub fn cycle_probability(
    n: usize,
    k: usize,
    alpha_n: usize,
    trials: usize,
    seed: u64,
) -> Result<CycleEstimate, HypergraphError> {
    if k == 0 || k > n {
        return Err(HypergraphError::Arity { k, n });
    }
    let bad = (0..trials)
        .into_par_iter()
        .filter(|&i| {
            let g = sample_hypergraph(n, k, alpha_n, derive_seed(seed, Role::Instance, i as u64)).expect("valid arity");
            !is_cycle_free(&g)
        })
        .count();
    let p = if trials == 0 { 0.0 } else { bad as f64 / trials as f64 };
    let std_error = if trials == 0 { 0.0 } else { (p * (1.0 - p) / trials as f64).sqrt() };
    Ok(CycleEstimate { trials, not_cycle_free: bad, fraction: p, std_error })
}

pub fn parse_hypergraph(text: &str) -> Result<Hypergraph, HypergraphError> {
    let body: Vec<&str> = text.lines().filter(|l| !l.trim_start().starts_with('#')).collect();
    let mut toks = body.iter().flat_map(|l| l.split_whitespace());
    let mut next = |what: &str| -> Result<usize, HypergraphError> {
        let t = toks.next().ok_or_else(|| HypergraphError::Parse(format!("missing {what}")))?;
        t.parse().map_err(|e| HypergraphError::Parse(format!("bad {what} {t:?}: {e}")))
    };
    let (n, k, m) = (next("n")?, next("k")?, next("m")?);
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let e = (0..k)
            .map(|_| {
                let v = next("vertex")?;
                v.checked_sub(1).map(|v| v as u32).ok_or(HypergraphError::Parse("vertices are 1-indexed".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        edges.push(e);
    }
    if next("trailing").is_ok() {
        return Err(HypergraphError::Parse(format!("more than {m} hyperedges")));
    }
    Hypergraph::new(n, k, edges)
}

pub fn write_hypergraph(g: &Hypergraph) -> String {
    let mut s = format!("{} {} {}\n", g.n, g.k, g.m());
    for e in &g.edges {
        let vs: Vec<String> = e.iter().map(|v| (v + 1).to_string()).collect();
        writeln!(s, "{}", vs.join(" ")).unwrap();
    }
    s
}
