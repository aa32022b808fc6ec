use super::{DirectedMultigraph, GraphError};

pub const DEFAULT_BRUTE_FORCE_LIMIT: usize = 24;

/// Optimal directed cut. `assignment[v]` is `true` when `v` is on the source side `L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DicutSolution {
    pub value: u64,
    pub assignment: Vec<bool>,
}

/// `max_{L,R} |E_{L->R}|` by enumerating all `2^n` partitions.
pub fn exact_dicut(g: &DirectedMultigraph) -> Result<DicutSolution, GraphError> {
    exact_dicut_with_limit(g, DEFAULT_BRUTE_FORCE_LIMIT)
}

pub fn exact_dicut_with_limit(
    g: &DirectedMultigraph,
    limit: usize,
) -> Result<DicutSolution, GraphError> {
    let n = g.n();
    if n > limit || n > 63 {
        return Err(GraphError::InstanceTooLarge { n, limit });
    }
    let mut out_nbrs = vec![Vec::new(); n];
    let mut in_nbrs = vec![Vec::new(); n];
    for e in g.edges() {
        out_nbrs[e.src as usize].push(e.dst as usize);
        in_nbrs[e.dst as usize].push(e.src as usize);
    }

    // Gray-code walk over subsets L; `mask` bit v set <=> v in L.
    let mut mask: u64 = 0;
    let mut cut: i64 = 0;
    let mut best = 0i64;
    let mut best_mask = 0u64;
    for step in 1u64..(1u64 << n) {
        let v = step.trailing_zeros() as usize;
        let bit = 1u64 << v;
        let entering = mask & bit == 0;
        let out_to_r = out_nbrs[v].iter().filter(|&&w| mask & (1 << w) == 0).count() as i64;
        let in_from_l = in_nbrs[v].iter().filter(|&&u| mask & (1 << u) != 0).count() as i64;
        // v in L cuts its edges into R; v in R has its edges from L cut.
        let delta = out_to_r - in_from_l;
        if entering {
            cut += delta;
        } else {
            cut -= delta;
        }
        mask ^= bit;
        if cut > best {
            best = cut;
            best_mask = mask;
        }
    }
    Ok(DicutSolution {
        value: best as u64,
        assignment: (0..n).map(|v| best_mask & (1 << v) != 0).collect(),
    })
}
