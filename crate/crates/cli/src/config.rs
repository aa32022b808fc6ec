//! Config files and flag merging. Flags override the config file, which
//! overrides built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

/// Every key a TOML config file may set. Commands read the keys they use.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub scheme: Option<PathBuf>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub q: Option<u32>,
    pub k: Option<usize>,
    pub alpha_n: Option<usize>,
    pub ell: Option<usize>,
    pub hybrid: Option<usize>,
    pub family: Option<Family>,
    pub predicates: Option<PathBuf>,
    pub max_degree: Option<u64>,
    pub eps: Option<f64>,
    pub sample_size: Option<f64>,
    pub cutoff: Option<u64>,
    pub order: Option<Order>,
    pub oracle_limit: Option<usize>,
    pub csv: Option<bool>,
    pub grid: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct SharedArgs {
    /// Master seed; every per-trial seed is derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Oblivious scheme file (default: the built-in 21-class scheme).
    #[arg(long, global = true)]
    pub scheme: Option<PathBuf>,
}

/// Shared settings after merging.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Shared {
    pub seed: u64,
    pub trials: usize,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub scheme: Option<PathBuf>,
    pub config: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TRIALS: usize = 1;

impl Shared {
    pub fn resolve(args: &SharedArgs, file: &FileConfig) -> Result<Self> {
        let s = Shared {
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            trials: args.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
            jobs: args.jobs.or(file.jobs),
            out: args.out.clone().or_else(|| file.out.clone()),
            scheme: args.scheme.clone().or_else(|| file.scheme.clone()),
            config: args.config.clone(),
        };
        if s.trials == 0 {
            bail!("--trials must be at least 1");
        }
        if s.jobs == Some(0) {
            bail!("--jobs must be at least 1");
        }
        Ok(s)
    }
}

/// `flag`, else `file`, else `default`.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// `flag`, else `file`, else an error naming the missing key.
pub fn require<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T> {
    match flag.or(file) {
        Some(v) => Ok(v),
        None => bail!("missing required setting --{name} (flag or config key `{}`)", name.replace('-', "_")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Dicut,
    Cut,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    /// Fresh uniformly random order per trial.
    Random,
    /// File order.
    Given,
    /// Sorted by source vertex.
    Sorted,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str("seed = 5\ntrials = 3\njobs = 2").unwrap();
        let args = SharedArgs { seed: Some(9), ..Default::default() };
        let s = Shared::resolve(&args, &file).unwrap();
        assert_eq!((s.seed, s.trials, s.jobs), (9, 3, Some(2)));
        let s = Shared::resolve(&SharedArgs::default(), &FileConfig::default()).unwrap();
        assert_eq!((s.seed, s.trials, s.jobs), (DEFAULT_SEED, DEFAULT_TRIALS, None));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("sed = 1").is_err());
        let f: FileConfig = toml::from_str("order = \"sorted\"\nfamily = \"cut\"").unwrap();
        assert_eq!((f.order, f.family), (Some(Order::Sorted), Some(Family::Cut)));
    }

    #[test]
    fn zero_trials_rejected() {
        let args = SharedArgs { trials: Some(0), ..Default::default() };
        assert!(Shared::resolve(&args, &FileConfig::default()).is_err());
    }
}
