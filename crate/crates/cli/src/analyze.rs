use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Subcommand;
use serde_json::json;
use streamcut::csp::{rho_min_over_families, Predicate};
use streamcut::hypergraph::{cc_part, cycle_probability, estimate_h, is_cycle_free, parse_hypergraph};

use crate::config::{pick, require, FileConfig, Shared};
use crate::gen::FamilyArgs;
use crate::record::{open_output, read_records};
use crate::run::in_pool;

#[derive(Clone, Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Summarize a JSON-lines file written by `run`.
    Records {
        input: PathBuf,
        /// Lower end of the success band `[low * val, val]`.
        #[arg(long, default_value_t = 0.4)]
        band_low: f64,
    },
    /// Fraction of random hypergraphs whose incidence graph has a cycle.
    Cycles {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        alpha_n: Option<usize>,
    },
    /// Monte Carlo estimate of the worst-case expected labelling count.
    H {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        q: Option<u32>,
        #[arg(long)]
        alpha_n: Option<usize>,
        #[arg(long)]
        ell: Option<usize>,
    },
    /// Minimum instance value of a predicate family.
    RhoMin {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Cycle-freeness and component partition of a hypergraph file.
    Hypergraph {
        input: PathBuf,
        /// Comma-separated 1-indexed vertices to partition.
        #[arg(long, value_delimiter = ',')]
        vertices: Vec<u32>,
    },
}

fn emit(shared: &Shared, v: serde_json::Value) -> Result<()> {
    let mut w = open_output(shared.out.as_deref())?;
    writeln!(w, "{}", serde_json::to_string(&v)?)?;
    w.flush()?;
    Ok(())
}

pub fn cmd_analyze(cmd: &AnalyzeCommand, shared: &Shared, file: &FileConfig) -> Result<()> {
    match cmd {
        AnalyzeCommand::Records { input, band_low } => {
            let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
            let (config, records) = read_records(&text)?;
            emit(shared, summarize(config, &records, *band_low))
        }
        AnalyzeCommand::Cycles { n, k, alpha_n } => {
            let (n, k, alpha_n) = (require(*n, file.n, "n")?, require(*k, file.k, "k")?, require(*alpha_n, file.alpha_n, "alpha-n")?);
            let est = in_pool(shared.jobs, || cycle_probability(n, k, alpha_n, shared.trials, shared.seed))??;
            let alpha = alpha_n as f64 / n as f64;
            emit(
                shared,
                json!({
                    "n": n, "k": k, "alpha_n": alpha_n, "seed": shared.seed,
                    "estimate": est,
                    "bound": 2.0 * (k as f64).powi(4) * alpha * alpha,
                }),
            )
        }
        AnalyzeCommand::H { n, k, q, alpha_n, ell } => {
            let n = require(*n, file.n, "n")?;
            let k = require(*k, file.k, "k")?;
            let q = require(*q, file.q, "q")?;
            let alpha_n = require(*alpha_n, file.alpha_n, "alpha-n")?;
            let ell = require(*ell, file.ell, "ell")?;
            let est = in_pool(shared.jobs, || estimate_h(n, k, q, alpha_n, ell, shared.trials, shared.seed))??;
            emit(
                shared,
                json!({
                    "n": n, "k": k, "q": q, "alpha_n": alpha_n, "ell": ell, "seed": shared.seed,
                    "representatives": "one vector per multiset of nonzero values, supported on the first ell vertices",
                    "estimate": est,
                }),
            )
        }
        AnalyzeCommand::RhoMin { family, grid } => {
            let preds: Vec<Predicate> = family.resolve(file)?.predicates();
            let grid = pick(*grid, file.grid, 1000);
            let outer = if preds.len() == 1 { 1 } else { 20 };
            let r = rho_min_over_families(&preds, outer, grid)?;
            emit(shared, json!({ "value": r.value, "weights": r.weights, "argmax": r.inner.argmax, "grid": grid }))
        }
        AnalyzeCommand::Hypergraph { input, vertices } => {
            let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
            let g = parse_hypergraph(&text)?;
            if vertices.iter().any(|&v| v == 0 || v as usize > g.n()) {
                bail!("--vertices must be 1-indexed and at most n = {}", g.n());
            }
            let u: Vec<u32> = vertices.iter().map(|v| v - 1).collect();
            let mut part = cc_part(&g, &u);
            for p in &mut part.parts {
                for v in p.iter_mut() {
                    *v += 1;
                }
            }
            emit(shared, json!({ "n": g.n(), "k": g.k(), "m": g.m(), "cycle_free": is_cycle_free(&g), "cc_part": part }))
        }
    }
}

fn summarize(config: Option<serde_json::Value>, records: &[crate::record::TrialRecord], band_low: f64) -> serde_json::Value {
    let with_estimate = records.iter().filter(|r| r.estimate.is_some()).count();
    let ratios: Vec<f64> = records.iter().filter_map(|r| r.ratio).collect();
    let in_band = records
        .iter()
        .filter(|r| match (r.estimate, r.exact) {
            (Some(e), Some(v)) => e >= band_low * v as f64 && e <= v as f64 + 1e-9 * (v as f64).max(1.0),
            _ => false,
        })
        .count();
    let with_exact = records.iter().filter(|r| r.exact.is_some() && r.estimate.is_some()).count();
    let mut flags: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        for f in &r.flags {
            *flags.entry(f.as_str()).or_default() += 1;
        }
    }
    let mean = |xs: &[f64]| if xs.is_empty() { None } else { Some(xs.iter().sum::<f64>() / xs.len() as f64) };
    let errors: Vec<f64> = records.iter().filter_map(|r| r.max_matrix_error).collect();
    json!({
        "config": config,
        "trials": records.len(),
        "with_estimate": with_estimate,
        "mean_ratio": mean(&ratios),
        "min_ratio": ratios.iter().copied().reduce(f64::min),
        "band": [band_low, 1.0],
        "in_band": in_band,
        "in_band_fraction": if with_exact > 0 { Some(in_band as f64 / with_exact as f64) } else { None },
        "max_matrix_error": errors.iter().copied().reduce(f64::max),
        "max_tracked_vertices": records.iter().map(|r| r.space_highwater.tracked_vertices).max(),
        "max_stored_edges": records.iter().map(|r| r.space_highwater.stored_edges).max(),
        "flags": flags,
    })
}
