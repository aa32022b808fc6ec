//! Random graph generators for experiments.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{DirectedMultigraph, Edge, Vertex};

/// `m` independent edges, each a uniform ordered pair of distinct vertices.
pub fn random_multigraph<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> DirectedMultigraph {
    assert!(n >= 2 || m == 0, "need two vertices to place an edge");
    let edges = (0..m)
        .map(|_| {
            let u = rng.gen_range(0..n) as Vertex;
            let off = rng.gen_range(1..n) as Vertex;
            Edge::new(u, (u + off) % n as Vertex)
        })
        .collect();
    DirectedMultigraph::new(n.max(1), edges).expect("generated edges are valid")
}

/// Random graph with total degree at most `d` at every vertex.
///
/// Every vertex contributes `d` stubs; the shuffled stub list is paired off
/// consecutively and each pair becomes an edge oriented by stub order. Pairs
/// landing on the same vertex are dropped, so most vertices have degree
/// exactly `d` and `m` is close to `n d / 2`.
pub fn bounded_degree_graph<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> DirectedMultigraph {
    let mut stubs: Vec<Vertex> = (0..n as Vertex).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    stubs.shuffle(rng);
    let edges = stubs
        .chunks_exact(2)
        .filter(|p| p[0] != p[1])
        .map(|p| Edge::new(p[0], p[1]))
        .collect();
    DirectedMultigraph::new(n.max(1), edges).expect("generated edges are valid")
}

/// Edges sorted by source then target: all out-edges of vertex 0 first.
pub fn sorted_by_source(g: &DirectedMultigraph) -> Vec<Edge> {
    let mut edges = g.edges().to_vec();
    edges.sort();
    edges
}
