//! Scaling fits and summary estimators over replicate data.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Normal quantile for two-sided 95% intervals.
pub const Z95: f64 = 1.96;

/// Least-squares line `y = intercept + exponent * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub stderr: f64,
    pub n_points: usize,
}

impl FitResult {
    pub fn ci(&self, z: f64) -> (f64, f64) {
        (self.exponent - z * self.stderr, self.exponent + z * self.stderr)
    }

    pub fn ci95(&self) -> (f64, f64) {
        self.ci(Z95)
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.exponent * x
    }
}

struct Moments {
    mean_x: f64,
    sxx: f64,
}

fn moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    Moments { mean_x, sxx: xs.iter().map(|x| (x - mean_x).powi(2)).sum() }
}

/// Ordinary least squares; stderr of the slope is `sqrt(SSE/(n-2)/Sxx)`.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!("{} points, need at least 3", points.len())));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InsufficientData("non-finite data point".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let m = moments(&xs);
    if m.sxx == 0.0 {
        return Err(Error::InsufficientData("all x values coincide".into()));
    }
    let n = points.len() as f64;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - m.mean_x) * (y - mean_y)).sum();
    let slope = sxy / m.sxx;
    let intercept = mean_y - slope * m.mean_x;
    let sse: f64 = points.iter().map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let sst: f64 = points.iter().map(|(_, y)| (y - mean_y).powi(2)).sum();
    let r_squared = if sst == 0.0 { 1.0 } else { 1.0 - sse / sst };
    let stderr = (sse / (n - 2.0) / m.sxx).sqrt();
    Ok(FitResult { exponent: slope, intercept, r_squared, stderr, n_points: points.len() })
}

fn log_points(points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    points
        .iter()
        .map(|&(x, y)| if x > 0.0 && y > 0.0 { Ok((x.ln(), y.ln())) } else { Err(Error::NonPositive(x, y)) })
        .collect()
}

/// Fit of `y = C x^b` on log-log axes.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    linear_fit(&log_points(points)?)
}

/// Slope stderr combining regression scatter with the propagated error of
/// each point, given as `(x, y, sd_y)`.
fn with_propagated(fit: FitResult, xs: &[f64], sds: &[f64]) -> FitResult {
    let m = moments(xs);
    let var_prop: f64 = xs.iter().zip(sds).map(|(x, s)| ((x - m.mean_x) * s).powi(2)).sum::<f64>() / (m.sxx * m.sxx);
    FitResult { stderr: (fit.stderr.powi(2) + var_prop).sqrt(), ..fit }
}

/// Power-law fit where each mean carries a standard error `sd_y`.
pub fn fit_power_law_with_errors(points: &[(f64, f64, f64)]) -> Result<FitResult> {
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.0, p.1)).collect();
    let fit = fit_power_law(&xy)?;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let sds: Vec<f64> = points.iter().map(|p| p.2 / p.1).collect();
    Ok(with_propagated(fit, &xs, &sds))
}

/// Linear fit where each mean carries a standard error.
pub fn linear_fit_with_errors(points: &[(f64, f64, f64)]) -> Result<FitResult> {
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.0, p.1)).collect();
    let fit = linear_fit(&xy)?;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let sds: Vec<f64> = points.iter().map(|p| p.2).collect();
    Ok(with_propagated(fit, &xs, &sds))
}

/// `y ~ a + b log n` against `y ~ a + b n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGrowthFit {
    pub log_fit: FitResult,
    pub linear_fit: FitResult,
    /// The logarithmic model leaves less residual scatter.
    pub log_preferred: bool,
}

pub fn fit_log_growth(points: &[(f64, f64)]) -> Result<LogGrowthFit> {
    if points.len() < 4 {
        return Err(Error::InsufficientData(format!("{} scales, need at least 4", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|p| p.0 <= 0.0) {
        return Err(Error::NonPositive(x, y));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y)).collect();
    let log_fit = linear_fit(&logs)?;
    let lin_fit = linear_fit(points)?;
    Ok(LogGrowthFit { log_fit, linear_fit: lin_fit, log_preferred: log_fit.r_squared >= lin_fit.r_squared })
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Time constant estimate from point-to-point passage times at several `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MuEstimate {
    /// Mean of `a_{0,n}/n` at the largest `n`.
    pub mu_hat: f64,
    pub stderr: f64,
    /// Slope of the mean passage time between the two largest scales.
    pub increment: f64,
    pub increment_stderr: f64,
    /// `mu` in `E a_{0,n} = mu n + c log n + d` solved on the three largest scales.
    pub log_corrected: f64,
    pub log_corrected_stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `(n, mean a/n, stderr)` per scale.
    pub per_scale: Vec<(u32, f64, f64)>,
    /// Some `a/n` mean rises significantly with `n`.
    pub subadditivity_violated: bool,
    /// `a/n` still falls significantly between the two largest scales.
    pub still_decreasing: bool,
}

impl MuEstimate {
    pub fn n_grid(&self) -> Vec<u32> {
        self.per_scale.iter().map(|s| s.0).collect()
    }

    pub fn ci_contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

pub const MIN_MU_REPLICATES: usize = 30;

/// `mu_hat` is the largest-scale mean of `a/n`. Its upper confidence bound
/// is the usual one: `a/n` overestimates the limit at every scale. The
/// lower bound comes from fitting `mu n + c log n + d` exactly to the mean
/// passage times at the three largest scales. Plain increments keep a
/// positive `c log 2 / n` bias, which is resolved with enough replicates
/// at criticality where `a_{0,n}` grows like `log n`.
pub fn estimate_mu(samples: &BTreeMap<u32, Vec<f64>>) -> Result<MuEstimate> {
    if samples.len() < 3 {
        return Err(Error::InsufficientData(format!("{} scales, need at least 3", samples.len())));
    }
    if let Some((n, v)) = samples.iter().find(|(_, v)| v.len() < MIN_MU_REPLICATES) {
        return Err(Error::InsufficientData(format!(
            "{} replicates at n = {n}, need {MIN_MU_REPLICATES}",
            v.len()
        )));
    }
    if samples.contains_key(&0) {
        return Err(Error::InsufficientData("scale n = 0".into()));
    }
    let per_scale: Vec<(u32, f64, f64)> = samples
        .iter()
        .map(|(&n, v)| {
            let scaled: Vec<f64> = v.iter().map(|a| a / n as f64).collect();
            let (m, se) = mean_and_se(&scaled);
            (n, m, se)
        })
        .collect();
    let noise = |a: &(u32, f64, f64), b: &(u32, f64, f64)| 2.0 * (a.2 * a.2 + b.2 * b.2).sqrt();
    let subadditivity_violated = per_scale.windows(2).any(|w| w[1].1 - w[0].1 > noise(&w[0], &w[1]));
    let (prev, last) = (&per_scale[per_scale.len() - 2], &per_scale[per_scale.len() - 1]);
    let still_decreasing = prev.1 - last.1 > noise(prev, last);
    let (mu_hat, stderr) = (last.1, last.2);

    let (n0, n1) = (prev.0 as f64, last.0 as f64);
    let (m0, s0) = mean_and_se(&samples[&prev.0]);
    let (m1, s1) = mean_and_se(&samples[&last.0]);
    let increment = (m1 - m0) / (n1 - n0);
    let increment_stderr = (s0 * s0 + s1 * s1).sqrt() / (n1 - n0);

    let (log_corrected, log_corrected_stderr) = log_corrected_mu(samples);
    let ci_high = mu_hat + Z95 * stderr;
    let ci_low = (log_corrected - Z95 * log_corrected_stderr).max(0.0).min(mu_hat);
    Ok(MuEstimate {
        mu_hat,
        stderr,
        increment,
        increment_stderr,
        log_corrected,
        log_corrected_stderr,
        ci_low,
        ci_high,
        per_scale,
        subadditivity_violated,
        still_decreasing,
    })
}

/// Solves `m_i = mu n_i + c ln n_i + d` at the three largest scales; `mu`
/// is a fixed linear combination of the means, so its standard error follows.
fn log_corrected_mu(samples: &BTreeMap<u32, Vec<f64>>) -> (f64, f64) {
    let top: Vec<(f64, f64, f64)> = samples
        .iter()
        .rev()
        .take(3)
        .map(|(&n, v)| {
            let (m, se) = mean_and_se(v);
            (n as f64, m, se)
        })
        .collect();
    let [(nc, ..), (nb, ..), (na, ..)] = [top[0], top[1], top[2]];
    let (lcb, lba) = ((nc / nb).ln(), (nb / na).ln());
    let det = (nc - nb) / lcb - (nb - na) / lba;
    let weights = [1.0 / (det * lcb), -(1.0 / lcb + 1.0 / lba) / det, 1.0 / (det * lba)];
    let mu = weights.iter().zip(&top).map(|(w, t)| w * t.1).sum();
    let var: f64 = weights.iter().zip(&top).map(|(w, t)| (w * t.2).powi(2)).sum();
    (mu, var.sqrt())
}

/// Exponential growth rate of geodesic counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeEstimate {
    /// `None` when the counts never vary.
    pub fit: Option<FitResult>,
    pub degenerate: bool,
    /// Fraction of all samples that overflowed.
    pub censored_fraction: f64,
    /// `(n, mean log N, stderr)` over exact samples.
    pub per_scale: Vec<(u32, f64, f64)>,
}

impl SlopeEstimate {
    pub fn slope(&self) -> f64 {
        self.fit.map_or(0.0, |f| f.exponent)
    }
}

/// Linear fit of mean `log N_n` against `n`. Samples are `log N` or `None`
/// for an overflowed count, which is left out of the mean.
pub fn subcritical_slope(samples: &BTreeMap<u32, Vec<Option<f64>>>) -> Result<SlopeEstimate> {
    let total: usize = samples.values().map(Vec::len).sum();
    let censored = samples.values().flatten().filter(|s| s.is_none()).count();
    if total == 0 {
        return Err(Error::InsufficientData("no samples".into()));
    }
    if censored == total {
        return Err(Error::InsufficientData("every count overflowed".into()));
    }
    let per_scale: Vec<(u32, f64, f64)> = samples
        .iter()
        .filter_map(|(&n, v)| {
            let exact: Vec<f64> = v.iter().flatten().copied().collect();
            (!exact.is_empty()).then(|| {
                let (m, se) = mean_and_se(&exact);
                (n, m, se)
            })
        })
        .collect();
    let censored_fraction = censored as f64 / total as f64;
    let degenerate = samples.values().flatten().flatten().all(|&y| y == 0.0);
    if degenerate {
        return Ok(SlopeEstimate { fit: None, degenerate, censored_fraction, per_scale });
    }
    let pts: Vec<(f64, f64, f64)> = per_scale.iter().map(|&(n, m, se)| (n as f64, m, se)).collect();
    let fit = linear_fit_with_errors(&pts)?;
    Ok(SlopeEstimate { fit: Some(fit), degenerate, censored_fraction, per_scale })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceTable {
    pub rows: Vec<(f64, f64)>,
    /// Slopes rise strictly as `p` falls toward criticality.
    pub increasing: bool,
}

/// Tabulates slope against `p` (sorted ascending). `increasing` holds when
/// the slope rises strictly with `p`.
pub fn slope_divergence_sweep(p_grid: &[f64], slopes: &[f64]) -> Result<DivergenceTable> {
    if p_grid.len() != slopes.len() {
        return Err(Error::InsufficientData(format!("{} p values, {} slopes", p_grid.len(), slopes.len())));
    }
    if p_grid.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 p values".into()));
    }
    let mut rows: Vec<(f64, f64)> = p_grid.iter().copied().zip(slopes.iter().copied()).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let increasing = rows.windows(2).all(|w| w[1].1 > w[0].1);
    Ok(DivergenceTable { rows, increasing })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [16.0, 32.0, 64.0, 128.0].iter().map(|&n: &f64| (n, 3.0 * n.powf(1.5))).collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.exponent - 1.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.r_squared > 1.0 - 1e-12);
        assert!(f.stderr < 1e-9);
    }

    #[test]
    fn stderr_matches_textbook() {
        let pts = [(0.0, 0.0), (1.0, 1.0), (2.0, 1.0), (3.0, 3.0)];
        let f = linear_fit(&pts).unwrap();
        // slope 0.9, intercept -0.1, SSE = 0.7, Sxx = 5
        assert!((f.exponent - 0.9).abs() < 1e-12);
        assert!((f.stderr - (0.7f64 / 2.0 / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(fit_power_law(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]), Err(Error::NonPositive(..))));
        assert!(matches!(linear_fit(&[(1.0, 1.0), (2.0, 2.0)]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn log_growth_prefers_log() {
        let pts: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0, 128.0].iter().map(|&n: &f64| (n, 0.4 * n.ln() + 1.0)).collect();
        let g = fit_log_growth(&pts).unwrap();
        assert!(g.log_preferred);
        assert!((g.log_fit.exponent - 0.4).abs() < 1e-12);
        assert!(fit_log_growth(&pts[..3]).is_err());
        let lin: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0].iter().map(|&n| (n, 0.1 * n)).collect();
        let g = fit_log_growth(&lin).unwrap();
        assert!(g.log_fit.r_squared < g.linear_fit.r_squared && !g.log_preferred);
    }

    #[test]
    fn constant_power_law() {
        let f = fit_power_law(&[(1.0, 5.0), (2.0, 5.0), (4.0, 5.0)]).unwrap();
        assert_eq!(f.exponent, 0.0);
    }

    #[test]
    fn mu_on_deterministic_data() {
        let mut s = BTreeMap::new();
        for n in [16u32, 32, 64] {
            s.insert(n, vec![n as f64; 30]);
        }
        let m = estimate_mu(&s).unwrap();
        assert_eq!(m.mu_hat, 1.0);
        assert_eq!((m.ci_low, m.ci_high), (1.0, 1.0));
        assert!(!m.subadditivity_violated && !m.still_decreasing);
        s.insert(64, vec![1.0; 29]);
        assert!(estimate_mu(&s).is_err());
    }

    #[test]
    fn mu_with_logarithmic_offset() {
        // a_n = 0.3 n + 2 log n: limit 0.3, a/n visibly decreasing
        let mut s = BTreeMap::new();
        for n in [16u32, 32, 64, 128] {
            let base = 0.3 * n as f64 + 2.0 * (n as f64).ln();
            s.insert(n, (0..40).map(|i| base + (i % 5) as f64 - 2.0).collect());
        }
        let m = estimate_mu(&s).unwrap();
        assert!(m.still_decreasing);
        assert!((m.log_corrected - 0.3).abs() < 1e-9, "{}", m.log_corrected);
        assert!(m.ci_low <= 0.3 && m.ci_high > 0.3);
        assert!(m.increment > 0.3 + 0.01);
    }

    #[test]
    fn slope_with_censoring() {
        let mut s = BTreeMap::new();
        for n in [8u32, 16, 24, 32] {
            let v = 0.1 * n as f64;
            s.insert(n, vec![Some(v), Some(v + 0.2), Some(v - 0.2), None]);
        }
        let e = subcritical_slope(&s).unwrap();
        assert!((e.slope() - 0.1).abs() < 1e-12);
        assert_eq!(e.censored_fraction, 0.25);
        let zero: BTreeMap<u32, Vec<Option<f64>>> = [(8, vec![Some(0.0)]), (16, vec![Some(0.0)])].into();
        assert!(subcritical_slope(&zero).unwrap().degenerate);
        let all: BTreeMap<u32, Vec<Option<f64>>> = [(8, vec![None])].into();
        assert!(subcritical_slope(&all).is_err());
    }

    #[test]
    fn divergence() {
        let t = slope_divergence_sweep(&[0.3, 0.1, 0.2], &[0.9, 0.1, 0.4]).unwrap();
        assert!(t.increasing);
        assert_eq!(t.rows[0], (0.1, 0.1));
        assert!(!slope_divergence_sweep(&[0.1, 0.2], &[0.5, 0.5]).unwrap().increasing);
    }
}
