//! `streamcut`: generate instances, run the estimators, run the verification
//! suites and summarize results.
//!
//! Exit status: 0 on success, 1 when a verification check fails, 2 on usage
//! or validation errors.

use std::process::ExitCode;

use anyhow::Result;
pub use clap::Parser;
use clap::Subcommand;

pub mod analyze;
pub mod config;
pub mod gen;
pub mod record;
pub mod run;
pub mod verify;

use config::{FileConfig, Shared, SharedArgs};

#[derive(Parser)]
#[command(name = "streamcut", version, about = "Streaming Max-DICUT experiments")]
pub struct Cli {
    #[command(flatten)]
    pub shared: SharedArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Write graph, stream, instance or hypergraph files.
    #[command(subcommand)]
    Gen(gen::GenCommand),
    /// Run an estimator for --trials trials; one JSON record per trial.
    Run(run::RunArgs),
    /// Run a verification suite with fixed seeds.
    Verify(verify::VerifyArgs),
    /// Summaries and hypergraph or predicate statistics.
    #[command(subcommand)]
    Analyze(analyze::AnalyzeCommand),
}

pub fn dispatch(cli: &Cli) -> Result<ExitCode> {
    let file = FileConfig::load(cli.shared.config.as_deref())?;
    let shared = Shared::resolve(&cli.shared, &file)?;
    match &cli.command {
        Command::Gen(c) => gen::cmd_gen(c, &shared, &file)?,
        Command::Run(a) => run::cmd_run(a, &shared, &file)?,
        Command::Verify(a) => {
            if !verify::cmd_verify(a, &shared, &file, cli.shared.seed.is_some())? {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Analyze(c) => analyze::cmd_analyze(c, &shared, &file)?,
    }
    Ok(ExitCode::SUCCESS)
}
