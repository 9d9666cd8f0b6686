//! One JSON object per line, one line per cell.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::spec::ExperimentKind;

pub const RECORDS_FILE: &str = "records.jsonl";

/// A cell: one replicate at one `(p, n)` and, for box sweeps, one box
/// factor. Cells are ordered by the position of `p`, `n` and the factor in
/// the spec file, then by replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub p_index: usize,
    pub n_index: usize,
    pub factor_index: usize,
    pub rep: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub spec_hash: String,
    pub kind: String,
    pub p: f64,
    pub n: u32,
    pub rep: u64,
    pub seed: u64,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    /// Exact geodesic count as a decimal string.
    pub count: Option<String>,
    pub overflow: Option<bool>,
    pub max_len: Option<u32>,
    pub cross_len: Option<u32>,
    pub kappa: Option<u32>,
    pub cmax: Option<u64>,
    #[serde(rename = "event_E")]
    pub event_e: Option<bool>,
    pub wall_ms: Option<u64>,
    /// Best rigorous lower bound on the geodesic count, decimal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count_lower: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_factor: Option<u32>,
    /// Mean boundary-connected vertex count over full tiles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_mean: Option<f64>,
}

impl Record {
    pub fn blank(spec_hash: &str, kind: ExperimentKind, p: f64, n: u32, rep: u64, seed: u64) -> Self {
        Record {
            spec_hash: spec_hash.to_string(),
            kind: kind.name().to_string(),
            p,
            n,
            rep,
            seed,
            t: None,
            count: None,
            overflow: None,
            max_len: None,
            cross_len: None,
            kappa: None,
            cmax: None,
            event_e: None,
            wall_ms: None,
            count_lower: None,
            certified: None,
            half_width: None,
            box_factor: None,
            boundary_mean: None,
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn from_line(line: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }

    /// Natural log of the exact count.
    pub fn ln_count(&self) -> Option<f64> {
        self.count.as_deref().map(ln_decimal)
    }

    pub fn ln_count_lower(&self) -> Option<f64> {
        self.count_lower.as_deref().or(self.count.as_deref()).map(ln_decimal)
    }
}

/// `ln` of a nonnegative decimal integer of any length.
pub fn ln_decimal(s: &str) -> f64 {
    const HEAD: usize = 15;
    if s.len() <= HEAD {
        return s.parse::<f64>().map_or(f64::NAN, f64::ln);
    }
    let head: f64 = s.get(..HEAD).and_then(|h| h.parse().ok()).unwrap_or(f64::NAN);
    head.ln() + (s.len() - HEAD) as f64 * std::f64::consts::LN_10
}

/// Reads every record; a torn final line from an interrupted run is
/// dropped.
pub fn read_records(path: &Path) -> Result<Vec<Record>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(HarnessError::io(path, e)),
    };
    let complete = text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match Record::from_line(line) {
            Ok(r) => out.push(r),
            Err(_) if i + 1 == lines.len() && !complete => break,
            Err(e) => return Err(HarnessError::Record { path: path.to_path_buf(), line: i + 1, msg: e.to_string() }),
        }
    }
    Ok(out)
}

/// Appends records in order and flushes. A torn final line left by an
/// earlier crash is cut off first.
pub fn append_records(path: &Path, records: &[Record]) -> Result<()> {
    if let Ok(text) = fs::read_to_string(path) {
        if !text.is_empty() && !text.ends_with('\n') {
            let keep = text.rfind('\n').map_or(0, |i| i + 1);
            fs::write(path, &text[..keep]).map_err(|e| HarnessError::io(path, e))?;
        }
    }
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut buf = String::new();
    for r in records {
        buf.push_str(&r.to_line());
        buf.push('\n');
    }
    f.write_all(buf.as_bytes()).map_err(|e| HarnessError::io(path, e))?;
    f.flush().map_err(|e| HarnessError::io(path, e))
}
