//! Aggregating records into `summary.csv`, plot data, and phase verdicts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fpp_core::estimators::{
    estimate_mu, fit_log_growth, fit_power_law_with_errors, subcritical_slope, FitResult,
};

use crate::error::{HarnessError, Result};
use crate::record::{read_records, Record, RECORDS_FILE};
use crate::spec::ExperimentKind;

pub const SUMMARY_FILE: &str = "summary.csv";
pub const SUMMARY_HEADER: &str = "quantity,p,exponent,stderr,r2,n_points,verdict";
/// Lower threshold on event probabilities.
pub const EVENT_THRESHOLD: f64 = 0.01;
/// Lowest-crossing exponent conjectured from the triangular lattice; shown
/// for comparison only.
pub const CROSSING_REFERENCE: f64 = 4.0 / 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub quantity: String,
    pub p: f64,
    pub exponent: f64,
    pub stderr: f64,
    pub r2: Option<f64>,
    pub n_points: usize,
    pub verdict: String,
}

impl SummaryRow {
    fn value(quantity: impl Into<String>, p: f64, value: f64, stderr: f64, n_points: usize, verdict: &str) -> Self {
        SummaryRow { quantity: quantity.into(), p, exponent: value, stderr, r2: None, n_points, verdict: verdict.into() }
    }

    fn fit(quantity: impl Into<String>, p: f64, fit: &FitResult, verdict: &str) -> Self {
        SummaryRow {
            quantity: quantity.into(),
            p,
            exponent: fit.exponent,
            stderr: fit.stderr,
            r2: Some(fit.r_squared),
            n_points: fit.n_points,
            verdict: verdict.into(),
        }
    }

    fn insufficient(quantity: impl Into<String>, p: f64, n_points: usize) -> Self {
        SummaryRow::value(quantity, p, f64::NAN, f64::NAN, n_points, "insufficient_data")
    }

    pub fn ci95(&self) -> (f64, f64) {
        (self.exponent - 1.96 * self.stderr, self.exponent + 1.96 * self.stderr)
    }

    fn csv(&self) -> String {
        let num = |x: f64| if x.is_finite() { format!("{x}") } else { String::new() };
        format!(
            "{},{},{},{},{},{},{}",
            self.quantity,
            self.p,
            num(self.exponent),
            num(self.stderr),
            self.r2.map(num).unwrap_or_default(),
            self.n_points,
            self.verdict
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<SummaryRow>,
    pub verdicts: Vec<String>,
    /// Plot name and `(x, y)` points.
    pub plots: Vec<(String, Vec<(f64, f64)>)>,
}

impl Report {
    pub fn row(&self, quantity: &str, p: f64) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.quantity == quantity && r.p == p)
    }

    pub fn summary_csv(&self) -> String {
        let mut out = format!("{SUMMARY_HEADER}\n");
        for r in &self.rows {
            out.push_str(&r.csv());
            out.push('\n');
        }
        out
    }
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn binomial(hits: usize, total: usize) -> (f64, f64) {
    let q = hits as f64 / total as f64;
    (q, (q * (1.0 - q) / total as f64).sqrt())
}

/// Per-`n` values of one quantity, by `p`.
type Grouped<T> = BTreeMap<u64, (f64, BTreeMap<u32, Vec<T>>)>;

fn group<T>(records: &[&Record], value: impl Fn(&Record) -> T) -> Grouped<T> {
    let mut out: Grouped<T> = BTreeMap::new();
    for r in records {
        out.entry(r.p.to_bits()).or_insert_with(|| (r.p, BTreeMap::new())).1.entry(r.n).or_default().push(value(r));
    }
    out
}

fn means(per_n: &BTreeMap<u32, Vec<f64>>) -> Vec<(f64, f64, f64)> {
    per_n
        .iter()
        .filter(|(_, v)| !v.is_empty())
        .map(|(&n, v)| {
            let (m, se) = mean_se(v);
            (n as f64, m, se)
        })
        .collect()
}

fn plot_name(stem: &str, p: f64) -> String {
    format!("{stem}_p{p}")
}

/// Aggregates records of any mix of kinds.
pub fn summarize(records: &[Record]) -> Report {
    let mut rep = Report::default();
    for kind in ExperimentKind::ALL {
        let rs: Vec<&Record> = records.iter().filter(|r| r.kind == kind.name()).collect();
        if rs.is_empty() {
            continue;
        }
        match kind {
            ExperimentKind::Mu => mu_rows(&mut rep, &rs),
            ExperimentKind::A0nGrowth => a0n_rows(&mut rep, &rs),
            ExperimentKind::CountSubcritical => subcritical_rows(&mut rep, &rs),
            ExperimentKind::CountCritical => critical_rows(&mut rep, &rs),
            ExperimentKind::CrossingLength => crossing_rows(&mut rep, &rs),
            ExperimentKind::ClusterMax => cluster_rows(&mut rep, &rs),
            ExperimentKind::RswEvents => event_rows(&mut rep, &rs),
            ExperimentKind::CertificateSweep => certificate_rows(&mut rep, &rs),
            ExperimentKind::SupercriticalDivergence => divergence_rows(&mut rep, &rs),
        }
    }
    rep
}

fn mu_rows(rep: &mut Report, rs: &[&Record]) {
    for (_, (p, per_n)) in group(rs, |r| r.t.unwrap_or(f64::NAN)) {
        let per_n: BTreeMap<u32, Vec<f64>> =
            per_n.into_iter().map(|(n, v)| (n, v.into_iter().filter(|t| t.is_finite()).collect())).collect();
        rep.plots.push((
            plot_name("mu", p),
            per_n.iter().map(|(&n, v)| (n as f64, v.iter().sum::<f64>() / v.len() as f64 / n as f64)).collect(),
        ));
        match estimate_mu(&per_n) {
            Ok(m) => {
                let verdict = if m.ci_low > 0.0 { "positive" } else { "zero" };
                let mut row = SummaryRow::value("mu", p, m.mu_hat, m.stderr, per_n.len(), verdict);
                if m.still_decreasing {
                    row.verdict.push_str(";still_decreasing");
                }
                if m.subadditivity_violated {
                    row.verdict.push_str(";subadditivity_violated");
                }
                rep.rows.push(row);
                rep.rows.push(SummaryRow::value("mu_ci_low", p, m.ci_low, 0.0, per_n.len(), ""));
                rep.rows.push(SummaryRow::value("mu_ci_high", p, m.ci_high, 0.0, per_n.len(), ""));
                rep.rows.push(SummaryRow::value("mu_increment", p, m.increment, m.increment_stderr, 2, ""));
                rep.rows.push(SummaryRow::value("mu_log_corrected", p, m.log_corrected, m.log_corrected_stderr, 3, ""));
                let mean_weight = 1.0 - p;
                let below = if m.mu_hat < mean_weight { "below_mean_weight" } else { "not_below_mean_weight" };
                rep.rows.push(SummaryRow::value("mu_minus_mean_weight", p, m.mu_hat - mean_weight, m.stderr, 1, below));
                rep.verdicts.push(format!("time constant at p={p}: {verdict} (mu_hat {:.5}, 95% CI [{:.5}, {:.5}])", m.mu_hat, m.ci_low, m.ci_high));
            }
            Err(_) => rep.rows.push(SummaryRow::insufficient("mu", p, per_n.len())),
        }
    }
}

fn a0n_rows(rep: &mut Report, rs: &[&Record]) {
    for (_, (p, per_n)) in group(rs, |r| r.t.unwrap_or(f64::NAN)) {
        let pts: Vec<(f64, f64)> = means(&per_n).into_iter().map(|(n, m, _)| (n, m)).collect();
        rep.plots.push((plot_name("a0n", p), pts.clone()));
        match fit_log_growth(&pts) {
            Ok(g) => {
                let verdict = if g.log_preferred { "log_preferred" } else { "linear_preferred" };
                rep.rows.push(SummaryRow::fit("a0n_log_slope", p, &g.log_fit, verdict));
                rep.rows.push(SummaryRow::fit("a0n_linear_slope", p, &g.linear_fit, ""));
                rep.verdicts.push(format!(
                    "a_0n growth at p={p}: {verdict} (r2 log {:.4}, linear {:.4})",
                    g.log_fit.r_squared, g.linear_fit.r_squared
                ));
            }
            Err(_) => rep.rows.push(SummaryRow::insufficient("a0n_log_slope", p, pts.len())),
        }
    }
}

fn subcritical_rows(rep: &mut Report, rs: &[&Record]) {
    for (_, (p, per_n)) in group(rs, |r| r.ln_count()) {
        match subcritical_slope(&per_n) {
            Ok(s) => {
                rep.plots.push((plot_name("log_count", p), s.per_scale.iter().map(|&(n, m, _)| (n as f64, m)).collect()));
                let (verdict, row) = match s.fit {
                    None => ("degenerate", SummaryRow::value("subcritical_slope", p, 0.0, 0.0, s.per_scale.len(), "degenerate")),
                    Some(f) => {
                        let v = if f.ci95().0 > 0.0 { "positive" } else { "not_positive" };
                        (v, SummaryRow::fit("subcritical_slope", p, &f, v))
                    }
                };
                rep.rows.push(row);
                let total: usize = per_n.values().map(Vec::len).sum();
                rep.rows.push(SummaryRow::value("censored_fraction", p, s.censored_fraction, 0.0, total, ""));
                rep.verdicts.push(format!(
                    "subcritical slope sign at p={p}: {verdict} (slope {:.4}, censored {:.3})",
                    s.slope(),
                    s.censored_fraction
                ));
            }
            Err(_) => rep.rows.push(SummaryRow::insufficient("subcritical_slope", p, per_n.len())),
        }
    }
}

fn critical_rows(rep: &mut Report, rs: &[&Record]) {
    for (_, (p, per_n)) in group(rs, |r| r.ln_count_lower().unwrap_or(f64::NAN)) {
        let pts = means(&per_n);
        rep.plots.push((plot_name("log_count_lower", p), pts.iter().map(|q| (q.0, q.1)).collect()));
        match fit_power_law_with_errors(&pts) {
            Ok(f) => {
                let v = if f.ci95().0 > 1.0 { "superlinear" } else { "not_superlinear" };
                rep.rows.push(SummaryRow::fit("log_count_exponent", p, &f, v));
                rep.verdicts.push(format!(
                    "critical superlinearity at p={p}: {v} (b = {:.3} ± {:.3})",
                    f.exponent, f.stderr
                ));
            }
            Err(_) => rep.rows.push(SummaryRow::insufficient("log_count_exponent", p, pts.len())),
        }
    }
    for (_, (p, per_n)) in group(rs, |r| r.max_len.map_or(f64::NAN, f64::from)) {
        let pts = means(&per_n);
        rep.plots.push((plot_name("max_len", p), pts.iter().map(|q| (q.0, q.1)).collect()));
        match fit_power_law_with_errors(&pts) {
            Ok(f) => {
                let v = if f.ci95().1 < 2.0 { "subquadratic" } else { "not_subquadratic" };
                rep.rows.push(SummaryRow::fit("max_len_exponent", p, &f, v));
            }
            Err(_) => rep.rows.push(SummaryRow::insufficient("max_len_exponent", p, pts.len())),
        }
    }
}

fn crossing_rows(rep: &mut Report, rs: &[&Record]) {
    for (_, (p, per_n)) in group(rs, |r| r.cross_len) {
        let lens: BTreeMap<u32, Vec<f64>> =
            per_n.iter().map(|(&n, v)| (n, v.iter().flatten().map(|&l| l as f64).collect())).collect();
        let pts = means(&lens);
        rep.plots.push((plot_name("crossing_length", p), pts.iter().map(|q| (q.0, q.1)).collect()));
        match fit_power_law_with_errors(&pts) {
            Ok(f) => {
                let v = if f.ci95().0 > 1.0 { "superlinear" } else { "not_superlinear" };
                rep.rows.push(SummaryRow::fit("crossing_length_exponent", p, &f, v));
                let (lo, hi) = f.ci95();
                rep.verdicts.push(format!(
                    "lowest crossing length at p={p}: exponent {:.3}, 95% CI [{lo:.3}, {hi:.3}] (reference {CROSSING_REFERENCE:.3})",
                    f.exponent
                ));
            }
            Err(_) => rep.rows.push(SummaryRow::insufficient("crossing_length_exponent", p, pts.len())),
        }
    }
}

fn cluster_rows(rep: &mut Report, rs: &[&Record]) {
    for (_, (p, per_n)) in group(rs, |r| r.cmax.map_or(f64::NAN, |c| c as f64)) {
        let pts = means(&per_n);
        rep.plots.push((plot_name("cmax", p), pts.iter().map(|q| (q.0, q.1)).collect()));
        match fit_power_law_with_errors(&pts) {
            Ok(f) => {
                let v = if f.ci95().1 < 2.0 { "subquadratic" } else { "not_subquadratic" };
                rep.rows.push(SummaryRow::fit("cmax_exponent", p, &f, v));
                rep.verdicts.push(format!("largest cluster at p={p}: {v} (exponent {:.3} ± {:.3})", f.exponent, f.stderr));
            }
            Err(_) => rep.rows.push(SummaryRow::insufficient("cmax_exponent", p, pts.len())),
        }
    }
}

fn event_rows(rep: &mut Report, rs: &[&Record]) {
    for (_, (p, per_n)) in group(rs, |r| r.event_e.unwrap_or(false)) {
        let mut pts = Vec::new();
        for (n, v) in &per_n {
            let (q, se) = binomial(v.iter().filter(|&&e| e).count(), v.len());
            let verdict = if q > EVENT_THRESHOLD { "above_threshold" } else { "below_threshold" };
            rep.rows.push(SummaryRow::value(format!("event_probability_n{n}"), p, q, se, v.len(), verdict));
            pts.push((*n as f64, q));
        }
        let min = pts.iter().map(|q| q.1).fold(f64::INFINITY, f64::min);
        rep.verdicts.push(format!("event probability at p={p}: minimum over scales {min:.4} (threshold {EVENT_THRESHOLD})"));
        rep.plots.push((plot_name("event_probability", p), pts));
    }
}

fn certificate_rows(rep: &mut Report, rs: &[&Record]) {
    for (_, (p, per_n)) in group(rs, |r| (r.kappa, r.ln_count())) {
        let both: Vec<(u32, f64)> = per_n.values().flatten().filter_map(|&(k, c)| Some((k?, c?))).collect();
        // 2^κ ≤ N, compared on logs with a guard for rounding.
        let violations = both.iter().filter(|(k, c)| *k as f64 * std::f64::consts::LN_2 > c + 1e-9).count();
        let verdict = if violations == 0 { "sound" } else { "violated" };
        rep.rows.push(SummaryRow::value("certificate_violations", p, violations as f64, 0.0, both.len(), verdict));
        let kappas: Vec<f64> = per_n.values().flatten().filter_map(|x| x.0).map(f64::from).collect();
        if !kappas.is_empty() {
            let (m, se) = mean_se(&kappas);
            rep.rows.push(SummaryRow::value("mean_kappa", p, m, se, kappas.len(), ""));
        }
        rep.verdicts.push(format!("certificate at p={p}: {verdict} ({violations} violations in {} comparisons)", both.len()));
    }
}

fn divergence_rows(rep: &mut Report, rs: &[&Record]) {
    let mut cells: BTreeMap<(u64, u32), (f64, BTreeMap<u32, Vec<bool>>)> = BTreeMap::new();
    for r in rs {
        let e = cells.entry((r.p.to_bits(), r.n)).or_insert_with(|| (r.p, BTreeMap::new()));
        e.1.entry(r.box_factor.unwrap_or(0)).or_default().push(r.overflow.unwrap_or(false));
    }
    for ((_, n), (p, per_f)) in cells {
        let fracs: Vec<(u32, f64)> = per_f
            .iter()
            .map(|(&f, v)| {
                let (q, se) = binomial(v.iter().filter(|&&o| o).count(), v.len());
                rep.rows.push(SummaryRow::value(format!("overflow_fraction_n{n}_f{f}"), p, q, se, v.len(), ""));
                (f, q)
            })
            .collect();
        let increasing = fracs.len() >= 2 && fracs.windows(2).all(|w| w[1].1 > w[0].1);
        let verdict = if increasing { "increasing" } else { "not_increasing" };
        rep.rows.push(SummaryRow::value(format!("divergence_n{n}"), p, f64::NAN, f64::NAN, fracs.len(), verdict));
        rep.verdicts.push(format!(
            "supercritical divergence at p={p}, n={n}: {verdict} (overflow fractions {})",
            fracs.iter().map(|(f, q)| format!("{f}n: {q:.3}")).collect::<Vec<_>>().join(", ")
        ));
        rep.plots.push((format!("overflow_fraction_p{p}_n{n}"), fracs.iter().map(|&(f, q)| (f as f64, q)).collect()));
    }
}

/// Reads `records.jsonl` in `dir`, writes `summary.csv` and one `.dat`
/// file per plot.
pub fn report(dir: &Path) -> Result<Report> {
    if !dir.is_dir() {
        return Err(HarnessError::EmptyResults(dir.to_path_buf()));
    }
    let records = read_records(&dir.join(RECORDS_FILE))?;
    if records.is_empty() {
        return Err(HarnessError::EmptyResults(dir.to_path_buf()));
    }
    let rep = summarize(&records);
    let path = dir.join(SUMMARY_FILE);
    fs::write(&path, rep.summary_csv()).map_err(|e| HarnessError::io(&path, e))?;
    for (name, pts) in &rep.plots {
        let mut text = String::new();
        for (x, y) in pts {
            let _ = writeln!(text, "{x} {y}");
        }
        let path = dir.join(format!("{name}.dat"));
        fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    }
    Ok(rep)
}
