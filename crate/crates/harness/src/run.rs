//! Running every cell of a spec into a results directory.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::experiment::measure;
use crate::record::{append_records, read_records, CellKey, Record, RECORDS_FILE};
use crate::spec::ExperimentSpec;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SPEC_FILE: &str = "spec.txt";
/// Cells computed between two appends to the record file.
pub const CHUNK: usize = 64;
pub const THREADS_ENV: &str = "FPP_THREADS";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellFailure {
    pub p: String,
    pub n: u32,
    pub box_factor: Option<u32>,
    pub rep: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub spec_hash: String,
    pub total: usize,
    pub skipped: usize,
    pub completed: usize,
    pub failures: Vec<CellFailure>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            3
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    spec: String,
    spec_hash: &'a str,
    tool_version: &'static str,
    started_unix: u64,
    finished_unix: u64,
    cells_total: usize,
    cells_skipped: usize,
    cells_completed: usize,
    failures: &'a [CellFailure],
}

/// All cells in record order.
pub fn cells(spec: &ExperimentSpec) -> Vec<CellKey> {
    let factors = spec.factors().len();
    let mut out = Vec::new();
    for p_index in 0..spec.p.len() {
        for n_index in 0..spec.n.len() {
            for factor_index in 0..factors {
                out.extend((0..spec.replicates).map(|rep| CellKey { p_index, n_index, factor_index, rep }));
            }
        }
    }
    out
}

/// The cell a record belongs to, if it belongs to this spec.
pub fn cell_of(spec: &ExperimentSpec, r: &Record) -> Option<CellKey> {
    let p_index = spec.p.iter().position(|&p| p == r.p)?;
    let n_index = spec.n.iter().position(|&n| n == r.n)?;
    let factor_index = spec.factors().iter().position(|&f| f == r.box_factor)?;
    (r.rep < spec.replicates).then_some(CellKey { p_index, n_index, factor_index, rep: r.rep })
}

/// Worker count from `FPP_THREADS`, else rayon's default.
pub fn thread_count() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(HarnessError::Usage(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
        },
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn run(spec: &ExperimentSpec, out: &Path) -> Result<RunSummary> {
    run_with_threads(spec, out, thread_count()?)
}

/// Computes every cell not already recorded in `out`. Cells run in
/// parallel; records are appended in cell order, so the record file does
/// not depend on the thread count.
pub fn run_with_threads(spec: &ExperimentSpec, out: &Path, threads: Option<usize>) -> Result<RunSummary> {
    spec.validate()?;
    let started = unix_now();
    let hash = spec.hash();
    fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let records_path = out.join(RECORDS_FILE);
    let existing = read_records(&records_path)?;
    if let Some(other) = existing.iter().find(|r| r.spec_hash != hash) {
        return Err(HarnessError::Usage(format!(
            "{} holds records of spec {}, not {hash}",
            out.display(),
            other.spec_hash
        )));
    }
    fs::write(out.join(SPEC_FILE), spec.canonical()).map_err(|e| HarnessError::io(out.join(SPEC_FILE), e))?;
    let done: HashSet<CellKey> = existing.iter().filter_map(|r| cell_of(spec, r)).collect();
    let all = cells(spec);
    let pending: Vec<CellKey> = all.iter().copied().filter(|c| !done.contains(c)).collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| HarnessError::Usage(format!("thread pool: {e}")))?;

    let mut completed = 0;
    let mut failures = Vec::new();
    for chunk in pending.chunks(CHUNK) {
        let results: Vec<Result<Record>> = pool.install(|| chunk.par_iter().map(|&c| measure(spec, &hash, c)).collect());
        let mut ok = Vec::with_capacity(results.len());
        for (cell, res) in chunk.iter().zip(results) {
            match res {
                Ok(r) => ok.push(r),
                Err(e) => failures.push(CellFailure {
                    p: format!("{:?}", spec.p[cell.p_index]),
                    n: spec.n[cell.n_index],
                    box_factor: spec.factors()[cell.factor_index],
                    rep: cell.rep,
                    error: e.to_string(),
                }),
            }
        }
        completed += ok.len();
        append_records(&records_path, &ok)?;
    }

    let summary = RunSummary { spec_hash: hash.clone(), total: all.len(), skipped: all.len() - pending.len(), completed, failures };
    let manifest = Manifest {
        spec: spec.canonical(),
        spec_hash: &hash,
        tool_version: env!("CARGO_PKG_VERSION"),
        started_unix: started,
        finished_unix: unix_now(),
        cells_total: summary.total,
        cells_skipped: summary.skipped,
        cells_completed: summary.completed,
        failures: &summary.failures,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(out.join(MANIFEST_FILE), text + "\n").map_err(|e| HarnessError::io(out.join(MANIFEST_FILE), e))?;
    Ok(summary)
}
