use std::io::Write;

use anyhow::Result;
use clap::Args;
use serde_json::json;
use streamcut::suites::{run_all, run_suite, Suite, SuiteConfig, DEFAULT_SEED};

use crate::config::{FileConfig, Shared};
use crate::record::open_output;
use crate::run::{in_pool, load_scheme};

#[derive(Clone, Debug, Args)]
pub struct VerifyArgs {
    /// sandwich, concentration, reservoir, hash, rmd, hypergraph or all.
    pub suite: String,
    /// Emit JSON lines instead of text.
    #[arg(long)]
    pub json: bool,
}

/// Returns whether every check passed.
pub fn cmd_verify(args: &VerifyArgs, shared: &Shared, file: &FileConfig, seed_given: bool) -> Result<bool> {
    let suite: Option<Suite> = match args.suite.as_str() {
        "all" => None,
        s => Some(s.parse().map_err(anyhow::Error::msg)?),
    };
    // suites keep their own fixed seed unless one is asked for
    let seed = if seed_given || file.seed.is_some() { shared.seed } else { DEFAULT_SEED };
    let scheme = match &shared.scheme {
        Some(p) => Some(load_scheme(Some(p))?),
        None => None,
    };
    let cfg = SuiteConfig { seed, scheme };
    let reports = in_pool(shared.jobs, || match suite {
        Some(s) => run_suite(s, &cfg),
        None => run_all(&cfg),
    })?;
    let all_passed = reports.iter().all(|r| r.passed);
    let header = json!({
        "command": "verify",
        "suite": args.suite,
        "seed": seed,
        "scheme": shared.scheme,
        "jobs": shared.jobs,
        "config": shared.config,
    });
    let mut w = open_output(shared.out.as_deref())?;
    if args.json {
        writeln!(w, "{}", serde_json::to_string(&json!({ "config": header }))?)?;
        for r in &reports {
            writeln!(w, "{}", serde_json::to_string(r)?)?;
        }
    } else {
        writeln!(w, "# {}", serde_json::to_string(&header)?)?;
        for r in &reports {
            writeln!(w, "{}", r.line())?;
            for (k, v) in &r.stats {
                writeln!(w, "    {k} = {v}")?;
            }
        }
        let passed = reports.iter().filter(|r| r.passed).count();
        writeln!(w, "{passed}/{} checks passed", reports.len())?;
    }
    w.flush()?;
    Ok(all_passed)
}
