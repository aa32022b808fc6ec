//! Directed multigraphs, vertex biases and bias-class density matrices.
//!
//! Vertices are `0..n` internally. The text formats in [`format`] are
//! 1-indexed.

mod density;
pub mod format;
pub mod generate;
mod oracle;
mod scheme;

use std::collections::HashMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use density::{density_matrix, sub_density_matrix, DensityMatrix, MatrixEstimate};
pub use oracle::{exact_dicut, exact_dicut_with_limit, DicutSolution, DEFAULT_BRUTE_FORCE_LIMIT};
pub use scheme::{oblivious_estimate, ObliviousScheme};

pub type Vertex = u32;

/// Exact rational bias in `[-1, 1]`.
pub type Bias = Ratio<i64>;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("edge {index} endpoint {vertex} is outside [0, {n})")]
    VertexOutOfRange { index: usize, vertex: Vertex, n: usize },
    #[error("edge {index} is a self-loop on vertex {vertex}")]
    SelfLoop { index: usize, vertex: Vertex },
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("vertex {0} is not tracked")]
    Untracked(Vertex),
    #[error("bias {0} is outside [-1, 1]")]
    BiasOutOfRange(Bias),
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("dimension mismatch: matrix is {matrix}x{matrix}, scheme has {scheme} classes")]
    DimensionMismatch { matrix: usize, scheme: usize },
    #[error("instance too large: n = {n} exceeds brute-force limit {limit}")]
    InstanceTooLarge { n: usize, limit: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub src: Vertex,
    pub dst: Vertex,
}

impl Edge {
    pub const fn new(src: Vertex, dst: Vertex) -> Self {
        Edge { src, dst }
    }
}

impl From<(Vertex, Vertex)> for Edge {
    fn from((src, dst): (Vertex, Vertex)) -> Self {
        Edge { src, dst }
    }
}

/// An edge list on `n` vertices. Parallel edges are allowed, self-loops are not.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedMultigraph {
    n: usize,
    edges: Vec<Edge>,
}

impl DirectedMultigraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        for (index, e) in edges.iter().enumerate() {
            for vertex in [e.src, e.dst] {
                if vertex as usize >= n {
                    return Err(GraphError::VertexOutOfRange { index, vertex, n });
                }
            }
            if e.src == e.dst {
                return Err(GraphError::SelfLoop { index, vertex: e.src });
            }
        }
        Ok(DirectedMultigraph { n, edges })
    }

    pub fn from_pairs(n: usize, pairs: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        Self::new(n, pairs.iter().copied().map(Edge::from).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `(out_deg, in_deg)` for every vertex.
    pub fn degrees(&self) -> Vec<(u64, u64)> {
        let mut deg = vec![(0u64, 0u64); self.n];
        for e in &self.edges {
            deg[e.src as usize].0 += 1;
            deg[e.dst as usize].1 += 1;
        }
        deg
    }

    /// Largest total degree `out + in` over all vertices.
    pub fn max_degree(&self) -> u64 {
        self.degrees().iter().map(|(o, i)| o + i).max().unwrap_or(0)
    }

    /// Profile tracking every vertex with its degree in this graph.
    pub fn full_profile(&self) -> BiasProfile {
        let mut profile = BiasProfile::new();
        for v in 0..self.n as Vertex {
            profile.track(v);
        }
        for e in &self.edges {
            profile.record(*e);
        }
        profile
    }
}

/// Bias of a vertex with the given degrees. Isolated vertices get bias 0.
pub fn bias_from_degrees(out_deg: u64, in_deg: u64) -> Bias {
    let total = out_deg + in_deg;
    if total == 0 {
        return Bias::from_integer(0);
    }
    Bias::new(out_deg as i64 - in_deg as i64, total as i64)
}

/// Out/in degree counters for a designated set of vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BiasProfile {
    degrees: HashMap<Vertex, (u64, u64)>,
}

impl BiasProfile {
    pub fn new() -> Self {
        Self::default()
    }

    /// Start tracking `v`. Returns `true` if `v` was not tracked before.
    pub fn track(&mut self, v: Vertex) -> bool {
        let mut inserted = false;
        self.degrees.entry(v).or_insert_with(|| {
            inserted = true;
            (0, 0)
        });
        inserted
    }

    pub fn is_tracked(&self, v: Vertex) -> bool {
        self.degrees.contains_key(&v)
    }

    /// Count `e` toward the degrees of whichever endpoints are tracked.
    pub fn record(&mut self, e: Edge) {
        if let Some(d) = self.degrees.get_mut(&e.src) {
            d.0 += 1;
        }
        if let Some(d) = self.degrees.get_mut(&e.dst) {
            d.1 += 1;
        }
    }

    pub fn degrees(&self, v: Vertex) -> Option<(u64, u64)> {
        self.degrees.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.degrees.keys().copied()
    }

    pub fn bias(&self, v: Vertex) -> Result<Bias, GraphError> {
        let (out_deg, in_deg) = self.degrees(v).ok_or(GraphError::Untracked(v))?;
        Ok(bias_from_degrees(out_deg, in_deg))
    }
}

/// `bias(profile, v)`: exact `(out - in) / (out + in)` of a tracked vertex.
pub fn bias(profile: &BiasProfile, v: Vertex) -> Result<Bias, GraphError> {
    profile.bias(v)
}

/// Strictly increasing thresholds `-1 = t_1 < ... < t_l = 1`, `l >= 2`.
///
/// Class `r < l - 1` (0-based) holds biases in `[t_r, t_{r+1})`; the last
/// class holds exactly the biases equal to 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiasThresholds(Vec<Bias>);

impl BiasThresholds {
    pub fn new(t: Vec<Bias>) -> Result<Self, GraphError> {
        if t.len() < 2 {
            return Err(GraphError::InvalidThresholds(format!(
                "need at least 2 thresholds, got {}",
                t.len()
            )));
        }
        if t[0] != Bias::from_integer(-1) || t[t.len() - 1] != Bias::from_integer(1) {
            return Err(GraphError::InvalidThresholds(
                "first threshold must be -1 and last must be 1".into(),
            ));
        }
        if t.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GraphError::InvalidThresholds("thresholds must be strictly increasing".into()));
        }
        Ok(BiasThresholds(t))
    }

    /// Thresholds from `(numerator, denominator)` pairs.
    pub fn from_fractions(t: &[(i64, i64)]) -> Result<Self, GraphError> {
        if t.iter().any(|&(_, d)| d == 0) {
            return Err(GraphError::InvalidThresholds("zero denominator".into()));
        }
        Self::new(t.iter().map(|&(a, b)| Bias::new(a, b)).collect())
    }

    /// `(-1, 0, 1)`.
    pub fn three_way() -> Self {
        Self::from_fractions(&[(-1, 1), (0, 1), (1, 1)]).expect("valid thresholds")
    }

    /// Number of classes `l`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[Bias] {
        &self.0
    }

    /// 0-based class of bias `b`.
    pub fn class_of(&self, b: Bias) -> Result<usize, GraphError> {
        let one = Bias::from_integer(1);
        if b < -one || b > one {
            return Err(GraphError::BiasOutOfRange(b));
        }
        if b == one {
            return Ok(self.0.len() - 1);
        }
        // t_0 = -1 <= b < 1 = t_last, so the count of thresholds <= b is in 1..l-1.
        Ok(self.0.partition_point(|t| *t <= b) - 1)
    }
}

/// `bias_class(t, b)`: 0-based class index of `b`.
pub fn bias_class(t: &BiasThresholds, b: Bias) -> Result<usize, GraphError> {
    t.class_of(b)
}
