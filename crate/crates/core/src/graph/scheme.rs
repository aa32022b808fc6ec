use super::{BiasThresholds, GraphError, MatrixEstimate};

/// Oblivious rounding scheme: a vertex in bias class `i` joins `L` with
/// probability `probs[i]`, independently of all other vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct ObliviousScheme {
    thresholds: BiasThresholds,
    probs: Vec<f64>,
}

impl ObliviousScheme {
    pub fn new(thresholds: BiasThresholds, probs: Vec<f64>) -> Result<Self, GraphError> {
        if probs.len() != thresholds.len() {
            return Err(GraphError::InvalidScheme(format!(
                "{} thresholds but {} probabilities",
                thresholds.len(),
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(GraphError::InvalidScheme(format!("probability {p} outside [0, 1]")));
        }
        Ok(ObliviousScheme { thresholds, probs })
    }

    /// The shipped anti-symmetric step scheme.
    ///
    /// Thresholds `-1, -9/10, ..., 9/10, 1` (21 classes). Class `i` joins `L`
    /// with probability `clamp(1/2 + 4/5 * t_i, 0, 1)`, where `t_i` is the
    /// class's lower threshold, except that the lowest class gets 0 and the
    /// all-out class gets 1. Since `t_{l-1-i} = -t_i`, `p_i = 1 - p_{l-1-i}`.
    pub fn default_scheme() -> Self {
        let steps = 10i64;
        let mut t: Vec<(i64, i64)> = (-steps..=steps).map(|i| (i, steps)).collect();
        t.dedup();
        let thresholds = BiasThresholds::from_fractions(&t).expect("valid thresholds");
        let l = thresholds.len();
        let probs = (0..l).map(|i| default_prob(i, l)).collect();
        ObliviousScheme::new(thresholds, probs).expect("valid scheme")
    }

    pub fn thresholds(&self) -> &BiasThresholds {
        &self.thresholds
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `p_i = 1 - p_{l-1-i}` for all `i`, within `tol`.
    pub fn is_antisymmetric(&self, tol: f64) -> bool {
        let l = self.probs.len();
        (0..l).all(|i| (self.probs[i] + self.probs[l - 1 - i] - 1.0).abs() <= tol)
    }

    pub fn is_monotone(&self) -> bool {
        self.probs.windows(2).all(|w| w[0] <= w[1])
    }
}

// Uniform thresholds, so x below is t_i.
fn default_prob(i: usize, l: usize) -> f64 {
    const SLOPE: f64 = 0.8;
    let x = -1.0 + 2.0 * i as f64 / (l - 1) as f64;
    if i == 0 {
        0.0
    } else if i == l - 1 {
        1.0
    } else {
        (0.5 + SLOPE * x).clamp(0.0, 1.0)
    }
}

/// `sum_{i,j} p_i (1 - p_j) N(i,j) - (eps / 8) m`.
pub fn oblivious_estimate(
    n: &MatrixEstimate,
    scheme: &ObliviousScheme,
    m: u64,
    eps: f64,
) -> Result<f64, GraphError> {
    let l = scheme.len();
    if n.dim() != l {
        return Err(GraphError::DimensionMismatch { matrix: n.dim(), scheme: l });
    }
    let p = scheme.probs();
    let mut total = 0.0;
    for i in 0..l {
        for j in 0..l {
            total += p[i] * (1.0 - p[j]) * n.get(i, j);
        }
    }
    Ok(total - eps / 8.0 * m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{density_matrix, DirectedMultigraph};

    #[test]
    fn fully_biased_edge() {
        let g = DirectedMultigraph::from_pairs(2, &[(0, 1)]).unwrap();
        let t = BiasThresholds::three_way();
        let scheme = ObliviousScheme::new(t.clone(), vec![0.0, 0.5, 1.0]).unwrap();
        let m = density_matrix(&g, &t);
        assert_eq!(oblivious_estimate(&(&m).into(), &scheme, 1, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn uniform_scheme_gives_quarter() {
        let g = DirectedMultigraph::from_pairs(4, &[(0, 1), (1, 2), (2, 0), (3, 1), (0, 3)]).unwrap();
        let t = BiasThresholds::three_way();
        let scheme = ObliviousScheme::new(t.clone(), vec![0.5; 3]).unwrap();
        let m = density_matrix(&g, &t);
        assert_eq!(oblivious_estimate(&(&m).into(), &scheme, 5, 0.0).unwrap(), 1.25);
    }

    #[test]
    fn zero_matrix() {
        let scheme = ObliviousScheme::default_scheme();
        let n = MatrixEstimate::zeros(scheme.len());
        assert_eq!(oblivious_estimate(&n, &scheme, 0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn eps_term() {
        let scheme = ObliviousScheme::default_scheme();
        let n = MatrixEstimate::zeros(scheme.len());
        assert_eq!(oblivious_estimate(&n, &scheme, 16, 0.5).unwrap(), -1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let scheme = ObliviousScheme::default_scheme();
        let n = MatrixEstimate::zeros(3);
        assert_eq!(
            oblivious_estimate(&n, &scheme, 0, 0.0),
            Err(GraphError::DimensionMismatch { matrix: 3, scheme: scheme.len() })
        );
    }

    #[test]
    fn scheme_validation() {
        let t = BiasThresholds::three_way();
        assert!(ObliviousScheme::new(t.clone(), vec![0.0, 1.0]).is_err());
        assert!(ObliviousScheme::new(t, vec![0.0, 1.5, 1.0]).is_err());
    }

    #[test]
    fn default_scheme_shape() {
        let s = ObliviousScheme::default_scheme();
        assert!(s.is_antisymmetric(1e-12));
        assert!(s.is_monotone());
        assert_eq!(s.probs()[0], 0.0);
        assert_eq!(*s.probs().last().unwrap(), 1.0);
    }
}
