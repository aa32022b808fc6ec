use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use streamcut::algorithms::{
    bounded_degree_dicut, random_order_dicut, two_pass_dicut, AlgorithmParams, BoundedDegreeParams, DicutOutput,
};
use streamcut::graph::{
    density_matrix, exact_dicut_with_limit, format::parse_graph, DirectedMultigraph, ObliviousScheme,
    DEFAULT_BRUTE_FORCE_LIMIT,
};
use streamcut::seeding::{derive_seed, Role};
use streamcut::stream::{EdgeStream, StreamOrder};

use crate::config::{pick, require, FileConfig, Order, Shared};
use crate::record::{
    open_output, write_csv, write_json_lines, TrialRecord, TrialSeeds, FLAG_DEGREE_VIOLATED, FLAG_ORACLE_SKIPPED,
    FLAG_UNAVAILABLE,
};

pub const DEFAULT_EPS: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    RandomOrder,
    TwoPass,
    BoundedDegree,
}

impl Algorithm {
    fn id(self) -> &'static str {
        match self {
            Algorithm::RandomOrder => "random-order",
            Algorithm::TwoPass => "two-pass",
            Algorithm::BoundedDegree => "bounded-degree",
        }
    }

    fn default_order(self) -> Order {
        match self {
            Algorithm::RandomOrder => Order::Random,
            Algorithm::TwoPass | Algorithm::BoundedDegree => Order::Given,
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct RunArgs {
    #[arg(value_enum)]
    pub algorithm: Algorithm,
    /// Graph file.
    pub input: PathBuf,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Override the edge sample size (bounded-degree: the hash threshold factor).
    #[arg(long)]
    pub sample_size: Option<f64>,
    /// Override the small-instance cutoff below which the exact matrix is used.
    #[arg(long)]
    pub cutoff: Option<u64>,
    #[arg(long, value_enum)]
    pub order: Option<Order>,
    /// Degree bound assumed by bounded-degree.
    #[arg(long)]
    pub max_degree: Option<u64>,
    /// Largest n for which the exact Max-DICUT value is computed.
    #[arg(long)]
    pub oracle_limit: Option<usize>,
    /// Emit a CSV table instead of JSON lines.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Clone, Debug, Serialize)]
struct Effective {
    command: &'static str,
    algorithm: Algorithm,
    input: PathBuf,
    #[serde(flatten)]
    shared: Shared,
    eps: f64,
    eps_prime: f64,
    classes: usize,
    sample_size: f64,
    cutoff: u64,
    order: Order,
    max_degree: Option<u64>,
    oracle_limit: usize,
    csv: bool,
}

enum Params {
    Streaming(AlgorithmParams),
    Bounded(BoundedDegreeParams),
}

pub fn load_scheme(path: Option<&PathBuf>) -> Result<ObliviousScheme> {
    match path {
        None => Ok(ObliviousScheme::default_scheme()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading scheme {}", p.display()))?;
            streamcut::graph::format::parse_scheme(&text).with_context(|| format!("parsing scheme {}", p.display()))
        }
    }
}

pub fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j);
    }
    Ok(b.build()?.install(f))
}

pub fn cmd_run(args: &RunArgs, shared: &Shared, file: &FileConfig) -> Result<()> {
    let eps = pick(args.eps, file.eps, DEFAULT_EPS);
    if !(eps > 0.0 && eps < 1.0) {
        bail!("--eps must lie in (0, 1), got {eps}");
    }
    let order = args.order.or(file.order).unwrap_or(args.algorithm.default_order());
    let oracle_limit = pick(args.oracle_limit, file.oracle_limit, DEFAULT_BRUTE_FORCE_LIMIT);
    let csv = args.csv || file.csv.unwrap_or(false);
    let scheme = load_scheme(shared.scheme.as_ref())?;
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let g = parse_graph(&text).with_context(|| format!("parsing {}", args.input.display()))?;

    let sample_size = args.sample_size.or(file.sample_size);
    let cutoff = args.cutoff.or(file.cutoff);
    if sample_size.is_some_and(|k| !(k > 0.0 && k.is_finite())) {
        bail!("--sample-size must be positive");
    }
    let max_degree = match args.algorithm {
        Algorithm::BoundedDegree => Some(require(args.max_degree, file.max_degree, "max-degree")?),
        _ => args.max_degree.or(file.max_degree),
    };
    let params = match args.algorithm {
        Algorithm::BoundedDegree => {
            let mut p = BoundedDegreeParams::new(eps, scheme.len(), max_degree.expect("required above"))?;
            if let Some(k) = sample_size {
                p = p.with_k(k);
            }
            if let Some(c) = cutoff {
                p = p.with_exact_cutoff(c);
            }
            Params::Bounded(p)
        }
        _ => {
            let mut p = AlgorithmParams::for_scheme(eps, &scheme)?;
            if let Some(k) = sample_size {
                if k.fract() != 0.0 {
                    bail!("--sample-size must be an integer for {}", args.algorithm.id());
                }
                p = p.with_k(k as u64);
            }
            if let Some(c) = cutoff {
                p = p.with_m0(c);
            }
            Params::Streaming(p)
        }
    };
    let (eps_prime, k_eff, cutoff_eff) = match &params {
        Params::Streaming(p) => (p.eps_prime, p.k as f64, p.m0),
        Params::Bounded(p) => (p.eps_prime, p.k, p.exact_cutoff),
    };
    let effective = Effective {
        command: "run",
        algorithm: args.algorithm,
        input: args.input.clone(),
        shared: shared.clone(),
        eps,
        eps_prime,
        classes: scheme.len(),
        sample_size: k_eff,
        cutoff: cutoff_eff,
        order,
        max_degree,
        oracle_limit,
        csv,
    };
    let config = serde_json::to_value(&effective)?;

    let exact = if g.n() <= oracle_limit {
        Some(exact_dicut_with_limit(&g, oracle_limit)?.value)
    } else {
        eprintln!("warning: n = {} exceeds the oracle limit {oracle_limit}; records carry estimates only", g.n());
        None
    };
    let degree_violated = max_degree.is_some_and(|d| g.max_degree() > d);
    if degree_violated && args.algorithm == Algorithm::BoundedDegree {
        eprintln!("warning: graph has maximum degree {} > {}", g.max_degree(), max_degree.unwrap());
    }
    let truth = density_matrix(&g, scheme.thresholds());
    let ctx = TrialContext { g: &g, scheme: &scheme, params: &params, algorithm: args.algorithm, order, master: shared.seed };
    let records: Vec<TrialRecord> = in_pool(shared.jobs, || {
        (0..shared.trials)
            .into_par_iter()
            .map(|i| {
                let start = Instant::now();
                let (out, stream_seed) = ctx.trial(i);
                let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
                let mut flags = Vec::new();
                if exact.is_none() {
                    flags.push(FLAG_ORACLE_SKIPPED.to_string());
                }
                if degree_violated && args.algorithm == Algorithm::BoundedDegree {
                    flags.push(FLAG_DEGREE_VIOLATED.to_string());
                }
                if out.estimate.is_none() {
                    flags.push(FLAG_UNAVAILABLE.to_string());
                }
                TrialRecord {
                    trial: i,
                    algorithm: args.algorithm.id().to_string(),
                    seeds: TrialSeeds { master: shared.seed, stream_order: stream_seed, algorithm: out.seeds.clone() },
                    order: match (order, stream_seed) {
                        (Order::Random, Some(s)) => StreamOrder::Random(s),
                        (Order::Sorted, _) => StreamOrder::SortedBySource,
                        _ => StreamOrder::AsGiven,
                    },
                    n: g.n(),
                    m: out.m,
                    estimate: out.estimate,
                    exact,
                    ratio: match (out.estimate, exact) {
                        (Some(e), Some(v)) if v > 0 => Some(e / v as f64),
                        _ => None,
                    },
                    max_matrix_error: out.matrix.as_ref().map(|m| m.max_abs_error(&truth)),
                    space_highwater: out.space_highwater,
                    branch: out.branch_used,
                    failed_branches: out.failed_branches,
                    flags,
                    wall_time_ms,
                }
            })
            .collect()
    })?;

    let mut w = open_output(shared.out.as_deref())?;
    if csv {
        write_csv(&mut w, &config, &records)?;
    } else {
        write_json_lines(&mut w, &config, &records)?;
    }
    w.flush()?;
    Ok(())
}

struct TrialContext<'a> {
    g: &'a DirectedMultigraph,
    scheme: &'a ObliviousScheme,
    params: &'a Params,
    algorithm: Algorithm,
    order: Order,
    master: u64,
}

impl TrialContext<'_> {
    /// Trial `i`: stream order from `(StreamOrder, i)`, reservoir seed from
    /// `(AlgorithmCoins, i)`, bounded-degree branch seeds under `(Hash, i)`.
    fn trial(&self, i: usize) -> (DicutOutput, Option<u64>) {
        let i = i as u64;
        let (stream, stream_seed) = match self.order {
            Order::Random => {
                let s = derive_seed(self.master, Role::StreamOrder, i);
                (EdgeStream::permuted(self.g, s), Some(s))
            }
            Order::Given => (EdgeStream::as_given(self.g), None),
            Order::Sorted => (EdgeStream::sorted_by_source(self.g), None),
        };
        let out = match self.params {
            Params::Streaming(p) if self.algorithm == Algorithm::TwoPass => {
                two_pass_dicut(&stream, p, self.scheme, derive_seed(self.master, Role::AlgorithmCoins, i))
            }
            Params::Streaming(p) => random_order_dicut(&stream, p, self.scheme),
            Params::Bounded(p) => bounded_degree_dicut(&stream, p, self.scheme, derive_seed(self.master, Role::Hash, i)),
        };
        (out, stream_seed)
    }
}
