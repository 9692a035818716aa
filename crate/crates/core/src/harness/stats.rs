//! Per-cell summaries and log-log slope fits.

use std::collections::BTreeMap;

use super::config::Param;
use super::trial::{ResultTable, TrialRecord};
use crate::embed::Method;
use crate::error::{Error, Result};
use crate::synth::NoiseFamily;

/// Ordinary least squares fit of `log y = intercept + slope * log x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 2 {
        return Err(Error::domain(format!("need at least 2 points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite()) {
        return Err(Error::domain(format!("log-log fit needs positive finite points, got ({x}, {y})")));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("all x values are equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(SlopeFit { slope, intercept, r2 })
}

/// Mean and standard error of one (cell, method) group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub cell: usize,
    pub method: Method,
    pub n: usize,
    pub t: usize,
    pub d0: usize,
    pub d_embed: usize,
    pub nu: f64,
    pub alpha: f64,
    pub family: NoiseFamily,
    pub trials: usize,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`; zero for a single trial.
    pub sem: f64,
    /// Set when `sem` is zero only because there was a single trial.
    pub single_trial: bool,
}

impl SummaryRow {
    pub fn value(&self, p: Param) -> f64 {
        match p {
            Param::N => self.n as f64,
            Param::T => self.t as f64,
            Param::D0 => self.d0 as f64,
            Param::DEmbed => self.d_embed as f64,
            Param::Nu => self.nu,
            Param::Alpha => self.alpha,
            Param::Family => match self.family {
                NoiseFamily::Gaussian => 0.0,
                NoiseFamily::Laplacian => 1.0,
            },
        }
    }

    pub fn label(&self, p: Param) -> String {
        match p {
            Param::Family => self.family.to_string(),
            Param::Nu | Param::Alpha => format!("{}={}", p, crate::io::fmt_f64(self.value(p))),
            _ => format!("{}={}", p, self.value(p)),
        }
    }
}

pub fn mean_sem(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Groups records by (cell, method), in table order.
pub fn summarize(table: &ResultTable) -> Result<Vec<SummaryRow>> {
    if table.records.is_empty() {
        return Err(Error::domain("empty result table"));
    }
    let mut groups: BTreeMap<(usize, Method), Vec<&TrialRecord>> = BTreeMap::new();
    for r in &table.records {
        groups.entry((r.cell, r.method)).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|((cell, method), recs)| {
            let errors: Vec<f64> = recs.iter().map(|r| r.error_2inf).collect();
            let (mean, sem) = mean_sem(&errors);
            let first = recs[0];
            SummaryRow {
                cell,
                method,
                n: first.n,
                t: first.t,
                d0: first.d0,
                d_embed: first.d_embed,
                nu: first.nu,
                alpha: first.alpha,
                family: first.family,
                trials: recs.len(),
                mean,
                sem,
                single_trial: recs.len() == 1,
            }
        })
        .collect())
}

/// `(x, mean error)` points of one method, sorted by `x`, restricted to rows
/// accepted by `keep`.
pub fn curve(summary: &[SummaryRow], method: Method, x: Param, keep: impl Fn(&SummaryRow) -> bool) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = summary
        .iter()
        .filter(|r| r.method == method && keep(r))
        .map(|r| (r.value(x), r.mean))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_power_laws() {
        let sq: Vec<(f64, f64)> = [0.5, 1.0, 2.0, 7.0].iter().map(|&x| (x, x * x)).collect();
        let f = fit_loglog_slope(&sq).unwrap();
        assert_abs_diff_eq!(f.slope, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.r2, 1.0, epsilon = 1e-12);
        let rt: Vec<(f64, f64)> = [1e-6, 1e-4, 1e-2].iter().map(|&x: &f64| (x, 3.0 * x.sqrt())).collect();
        let f = fit_loglog_slope(&rt).unwrap();
        assert_abs_diff_eq!(f.slope, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.intercept, 3f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn noisy_points_match_closed_form() {
        // x = e^0, e^1, e^2 ; log y = 0.1, 0.9, 2.3
        // slope = sum (x-1)(y-1.1) / sum (x-1)^2 = (1.0 + 1.2) / 2 = 1.1
        // intercept = 1.1 - 1.1 * 1 = 0 ; residuals -0.1, -0.2, 0.1 -> sse 0.06
        // syy = 1 + 0.04 + 1.44 = 2.48 ; r2 = 1 - 0.06/2.48
        let e = std::f64::consts::E;
        let pts = [(1.0, 0.1f64.exp()), (e, 0.9f64.exp()), (e * e, 2.3f64.exp())];
        let f = fit_loglog_slope(&pts).unwrap();
        assert_abs_diff_eq!(f.slope, 1.1, epsilon = 1e-12);
        assert_abs_diff_eq!(f.intercept, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.r2, 1.0 - 0.06 / 2.48, epsilon = 1e-12);
    }

    #[test]
    fn fit_errors() {
        assert!(fit_loglog_slope(&[(1.0, 1.0)]).is_err());
        assert!(fit_loglog_slope(&[(1.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, -2.0)]).is_err());
        assert!(fit_loglog_slope(&[(2.0, 1.0), (2.0, 3.0)]).is_err());
    }

    #[test]
    fn mean_sem_cases() {
        assert_eq!(mean_sem(&[0.4]), (0.4, 0.0));
        assert!(mean_sem(&[0.2, 0.2, 0.2]).1 < 1e-15);
        // 1, 2, 6: mean 3, sample var (4 + 1 + 9)/2 = 7, sem sqrt(7/3)
        let (m, s) = mean_sem(&[1.0, 2.0, 6.0]);
        assert_abs_diff_eq!(m, 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s, (7.0f64 / 3.0).sqrt(), epsilon = 1e-15);
    }
}
