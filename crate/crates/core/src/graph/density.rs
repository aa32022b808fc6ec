use serde::{Deserialize, Serialize};

use super::{BiasProfile, BiasThresholds, DirectedMultigraph, Edge, GraphError};

/// `l x l` edge counts between bias classes, row = source class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityMatrix {
    dim: usize,
    counts: Vec<u64>,
    m_total: u64,
}

impl DensityMatrix {
    pub fn zeros(dim: usize, m_total: u64) -> Self {
        DensityMatrix { dim, counts: vec![0; dim * dim], m_total }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Edge count of the graph the classes were measured on.
    pub fn m_total(&self) -> u64 {
        self.m_total
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.dim + j]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn bump(&mut self, i: usize, j: usize) {
        self.counts[i * self.dim + j] += 1;
    }

    /// Every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> MatrixEstimate {
        MatrixEstimate {
            dim: self.dim,
            entries: self.counts.iter().map(|&c| c as f64 * factor).collect(),
        }
    }
}

/// Real-valued estimate `N` of a density matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixEstimate {
    dim: usize,
    entries: Vec<f64>,
}

impl MatrixEstimate {
    pub fn zeros(dim: usize) -> Self {
        MatrixEstimate { dim, entries: vec![0.0; dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// `max_{i,j} |N(i,j) - M(i,j)|`.
    pub fn max_abs_error(&self, exact: &DensityMatrix) -> f64 {
        assert_eq!(self.dim, exact.dim(), "matrix dimensions differ");
        self.entries
            .iter()
            .zip(exact.counts())
            .map(|(n, &m)| (n - m as f64).abs())
            .fold(0.0, f64::max)
    }
}

impl From<&DensityMatrix> for MatrixEstimate {
    fn from(m: &DensityMatrix) -> Self {
        m.scaled(1.0)
    }
}

/// `M_{G,t}`: classes from `g`'s own biases.
pub fn density_matrix(g: &DirectedMultigraph, t: &BiasThresholds) -> DensityMatrix {
    sub_density_matrix(g.edges(), &g.full_profile(), t)
        .expect("full profile tracks every vertex")
}

/// `M_{H subset G, t}`: counts edges of `h_edges`, classes from `profile`.
///
/// The matrix's `m_total` is `h_edges.len()`; callers scaling to the full
/// graph know `m` themselves.
pub fn sub_density_matrix(
    h_edges: &[Edge],
    profile: &BiasProfile,
    t: &BiasThresholds,
) -> Result<DensityMatrix, GraphError> {
    let mut out = DensityMatrix::zeros(t.len(), h_edges.len() as u64);
    for e in h_edges {
        let i = t.class_of(profile.bias(e.src)?)?;
        let j = t.class_of(profile.bias(e.dst)?)?;
        out.bump(i, j);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        let g = DirectedMultigraph::from_pairs(2, &[(0, 1)]).unwrap();
        let m = density_matrix(&g, &BiasThresholds::three_way());
        assert_eq!(m.get(2, 0), 1);
        assert_eq!(m.total(), 1);
    }

    #[test]
    fn empty_graph_is_zero() {
        let g = DirectedMultigraph::from_pairs(4, &[]).unwrap();
        let m = density_matrix(&g, &BiasThresholds::three_way());
        assert_eq!(m.total(), 0);
        assert_eq!(m.dim(), 3);
    }

    #[test]
    fn out_star() {
        // biases 1, -1, -1
        let g = DirectedMultigraph::from_pairs(3, &[(0, 1), (0, 2)]).unwrap();
        let m = density_matrix(&g, &BiasThresholds::three_way());
        assert_eq!(m.get(2, 0), 2);
        assert_eq!(m.total(), 2);
    }

    #[test]
    fn sub_matrix_uses_global_biases() {
        let g = DirectedMultigraph::from_pairs(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let t = BiasThresholds::three_way();
        let profile = g.full_profile();
        let sub = sub_density_matrix(&[Edge::new(0, 1)], &profile, &t).unwrap();
        assert_eq!(sub.get(1, 1), 1);
        assert_eq!(sub.total(), 1);
        assert_eq!(sub_density_matrix(&[], &profile, &t).unwrap().total(), 0);
        assert_eq!(sub_density_matrix(g.edges(), &profile, &t).unwrap(), density_matrix(&g, &t));
    }

    #[test]
    fn sub_matrix_untracked_endpoint() {
        let mut profile = BiasProfile::new();
        profile.track(0);
        let r = sub_density_matrix(&[Edge::new(0, 1)], &profile, &BiasThresholds::three_way());
        assert_eq!(r, Err(GraphError::Untracked(1)));
    }

    #[test]
    fn max_abs_error() {
        let g = DirectedMultigraph::from_pairs(3, &[(0, 1), (0, 2)]).unwrap();
        let m = density_matrix(&g, &BiasThresholds::three_way());
        let n = m.scaled(1.5);
        assert_eq!(n.max_abs_error(&m), 1.0);
    }
}
