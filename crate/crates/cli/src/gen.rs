use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use streamcut::csp::{
    clean, parse_predicates, parse_rmd_stream, sample_rmd_stream, write_assignment, write_instance,
    write_rmd_stream, MaskDistribution, Predicate, RmdFamily, RmdMember,
};
use streamcut::graph::generate::{bounded_degree_graph, random_multigraph};
use streamcut::graph::format::write_graph;
use streamcut::hypergraph::{sample_hypergraph, write_hypergraph};
use streamcut::seeding::{derive_seed, derived_rng, Role};

use crate::config::{pick, require, Family, FileConfig, Shared};
use crate::record::open_output;

#[derive(Clone, Debug, Subcommand)]
pub enum GenCommand {
    /// Random directed multigraph, or a bounded-degree graph with --max-degree.
    Graph {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        max_degree: Option<u64>,
    },
    /// Mask-detection stream from the YES or NO distribution.
    Rmd(RmdArgs),
    /// Cleaned instance of a stream file: the symbols with all-zero z.
    Clean {
        stream: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Random k-uniform hypergraph with ordered hyperedges.
    Hypergraph {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RmdKind {
    Yes,
    No,
}

#[derive(Clone, Debug, Args)]
pub struct RmdArgs {
    #[arg(value_enum)]
    pub kind: RmdKind,
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Stream length.
    #[arg(long)]
    pub alpha_n: Option<usize>,
    /// Number of leading symbols with planted masks (default: all for yes, none for no).
    #[arg(long)]
    pub hybrid: Option<usize>,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Where to write x* (default: `<out>.xstar`, or stderr without --out).
    #[arg(long)]
    pub xstar: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Args)]
pub struct FamilyArgs {
    /// Built-in family (default: dicut).
    #[arg(long, value_enum, conflicts_with = "predicates")]
    pub family: Option<Family>,
    /// Predicate file; each predicate gets the uniform mask on its satisfying set.
    #[arg(long)]
    pub predicates: Option<PathBuf>,
}

impl FamilyArgs {
    pub fn resolve(&self, file: &FileConfig) -> Result<RmdFamily> {
        if let Some(path) = self.predicates.as_ref().or(if self.family.is_none() { file.predicates.as_ref() } else { None }) {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let preds = parse_predicates(&text).with_context(|| format!("parsing {}", path.display()))?;
            return family_from_predicates(preds);
        }
        Ok(match pick(self.family, file.family, Family::Dicut) {
            Family::Dicut => RmdFamily::dicut(),
            Family::Cut => RmdFamily::cut(),
        })
    }
}

/// Uniform mask on each predicate's satisfying set, which must be one-wise uniform.
pub fn family_from_predicates(preds: Vec<Predicate>) -> Result<RmdFamily> {
    let members = preds
        .into_iter()
        .map(|f| Ok(RmdMember { dist: MaskDistribution::uniform_on(&f)?, predicate: f, weight: 1 }))
        .collect::<Result<Vec<_>>>()?;
    Ok(RmdFamily::new(members)?)
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    let mut w = open_output(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn cmd_gen(cmd: &GenCommand, shared: &Shared, file: &FileConfig) -> Result<()> {
    let out = shared.out.as_deref();
    match cmd {
        GenCommand::Graph { n, m, max_degree } => {
            let n = require(*n, file.n, "n")?;
            let mut rng = derived_rng(shared.seed, Role::Instance, 0);
            let g = match max_degree.or(file.max_degree) {
                Some(d) => bounded_degree_graph(n, d as usize, &mut rng),
                None => {
                    let m = require(*m, file.m, "m")?;
                    if n < 2 && m > 0 {
                        bail!("need n >= 2 to place an edge");
                    }
                    random_multigraph(n, m, &mut rng)
                }
            };
            write_text(out, &write_graph(&g))
        }
        GenCommand::Rmd(a) => {
            let family = a.family.resolve(file)?;
            for (name, given, have) in [("q", a.q.or(file.q).map(|q| q as usize), family.q() as usize), ("k", a.k.or(file.k), family.k())] {
                if given.is_some_and(|g| g != have) {
                    bail!("--{name} = {} does not match the predicate family ({have})", given.unwrap());
                }
            }
            let n = require(a.n, file.n, "n")?;
            let alpha_n = require(a.alpha_n, file.alpha_n, "alpha-n")?;
            let t = match a.hybrid.or(file.hybrid) {
                Some(t) => t,
                None if a.kind == RmdKind::Yes => alpha_n,
                None => 0,
            };
            let sample = sample_rmd_stream(&family, n, alpha_n, t, derive_seed(shared.seed, Role::Instance, 0))?;
            write_text(out, &write_rmd_stream(&sample))?;
            let xs = write_assignment(&sample.x_star);
            match a.xstar.clone().or_else(|| out.map(sidecar)) {
                Some(p) => fs::write(&p, xs).with_context(|| format!("writing {}", p.display())),
                None => {
                    eprint!("x*: {xs}");
                    Ok(())
                }
            }
        }
        GenCommand::Clean { stream, family } => {
            let family = family.resolve(file)?;
            let text = fs::read_to_string(stream).with_context(|| format!("reading {}", stream.display()))?;
            let (q, k, n, symbols) = parse_rmd_stream(&text)?;
            if q != family.q() || k != family.k() {
                bail!("stream has (q, k) = ({q}, {k}), family has ({}, {})", family.q(), family.k());
            }
            let psi = clean(&symbols, n, &family.predicates())?;
            write_text(out, &write_instance(&psi))
        }
        GenCommand::Hypergraph { n, k, m } => {
            let n = require(*n, file.n, "n")?;
            let k = require(*k, file.k, "k")?;
            let m = require(*m, file.m, "m")?;
            let g = sample_hypergraph(n, k, m, derive_seed(shared.seed, Role::Instance, 0))?;
            write_text(out, &write_hypergraph(&g))
        }
    }
}

/// `<path>.xstar`.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".xstar");
    PathBuf::from(s)
}
