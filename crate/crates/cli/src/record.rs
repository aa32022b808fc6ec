//! Trial records and their JSON-lines / CSV encodings.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use streamcut::algorithms::Branch;
use streamcut::stream::{SpaceUsage, StreamOrder};

pub const FLAG_ORACLE_SKIPPED: &str = "oracle-skipped";
pub const FLAG_DEGREE_VIOLATED: &str = "degree-assumption-violated";
pub const FLAG_UNAVAILABLE: &str = "estimate-unavailable";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSeeds {
    pub master: u64,
    /// Seed of the random stream order, if any.
    pub stream_order: Option<u64>,
    /// Reservoir seed, or one hash seed per bounded-degree branch.
    pub algorithm: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub algorithm: String,
    pub seeds: TrialSeeds,
    pub order: StreamOrder,
    pub n: usize,
    pub m: u64,
    pub estimate: Option<f64>,
    pub exact: Option<u64>,
    /// `estimate / exact`, only when `exact > 0`.
    pub ratio: Option<f64>,
    /// Largest entrywise gap between the matrix used and the true density matrix.
    pub max_matrix_error: Option<f64>,
    pub space_highwater: SpaceUsage,
    pub branch: Branch,
    pub failed_branches: Vec<u32>,
    pub flags: Vec<String>,
    pub wall_time_ms: f64,
}

/// One flat CSV row per record.
#[derive(Serialize)]
struct CsvRow<'a> {
    trial: usize,
    algorithm: &'a str,
    master_seed: u64,
    stream_seed: Option<u64>,
    algorithm_seeds: String,
    n: usize,
    m: u64,
    estimate: Option<f64>,
    exact: Option<u64>,
    ratio: Option<f64>,
    max_matrix_error: Option<f64>,
    tracked_vertices: u64,
    stored_edges: u64,
    aux_words: u64,
    branch: String,
    failed_branches: String,
    flags: String,
    wall_time_ms: f64,
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

impl TrialRecord {
    fn csv_row(&self) -> CsvRow<'_> {
        CsvRow {
            trial: self.trial,
            algorithm: &self.algorithm,
            master_seed: self.seeds.master,
            stream_seed: self.seeds.stream_order,
            algorithm_seeds: join(&self.seeds.algorithm),
            n: self.n,
            m: self.m,
            estimate: self.estimate,
            exact: self.exact,
            ratio: self.ratio,
            max_matrix_error: self.max_matrix_error,
            tracked_vertices: self.space_highwater.tracked_vertices,
            stored_edges: self.space_highwater.stored_edges,
            aux_words: self.space_highwater.aux_words,
            branch: match self.branch {
                Branch::Exact => "exact".into(),
                Branch::Sampled => "sampled".into(),
                Branch::Hashed { b } => format!("hashed-{b}"),
                Branch::Unavailable => "unavailable".into(),
            },
            failed_branches: join(&self.failed_branches),
            flags: join(&self.flags),
            wall_time_ms: self.wall_time_ms,
        }
    }
}

pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Header line `{"config": ...}` followed by one JSON record per line.
pub fn write_json_lines(out: &mut dyn Write, config: &serde_json::Value, records: &[TrialRecord]) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string(&serde_json::json!({ "config": config }))?)?;
    for r in records {
        writeln!(out, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}

/// `# config: <json>` comment line, then a CSV table.
pub fn write_csv(out: &mut dyn Write, config: &serde_json::Value, records: &[TrialRecord]) -> Result<()> {
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

/// Records from a JSON-lines run file; the header line is skipped.
pub fn read_records(text: &str) -> Result<(Option<serde_json::Value>, Vec<TrialRecord>)> {
    let mut header = None;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let v: serde_json::Value = serde_json::from_str(line).with_context(|| format!("line {}", i + 1))?;
        if let Some(c) = v.get("config") {
            header = Some(c.clone());
            continue;
        }
        records.push(serde_json::from_value(v).with_context(|| format!("line {}: not a trial record", i + 1))?);
    }
    Ok((header, records))
}
