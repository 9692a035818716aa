//! Plain-text summaries of a finished sweep: slopes per panel, the best
//! embedding dimension, and Laplacian/Gaussian error ratios.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::config::{Param, PlotSpec};
use super::stats::{fit_loglog_slope, SlopeFit, SummaryRow};
use crate::embed::Method;
use crate::synth::NoiseFamily;

/// Slope of one method's curve inside one panel.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelSlope {
    pub panel: String,
    pub method: Method,
    pub fit: SlopeFit,
}

fn panel_key(r: &SummaryRow, panels: &[Param]) -> String {
    if panels.is_empty() {
        "all".to_string()
    } else {
        panels.iter().map(|&p| r.label(p)).collect::<Vec<_>>().join(",")
    }
}

fn grouped<'a>(summary: &'a [SummaryRow], spec: &PlotSpec) -> Vec<(String, Vec<&'a SummaryRow>)> {
    let mut out: Vec<(String, Vec<&SummaryRow>)> = Vec::new();
    for r in summary {
        let key = panel_key(r, &spec.panels);
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => out.push((key, vec![r])),
        }
    }
    out
}

/// Log-log slope of mean error against `spec.x`, per panel and method.
/// Curves with fewer than two positive points are skipped.
pub fn panel_slopes(summary: &[SummaryRow], spec: &PlotSpec) -> Vec<PanelSlope> {
    let mut out = Vec::new();
    for (panel, rows) in grouped(summary, spec) {
        for m in Method::ALL {
            let mut pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.method == m)
                .map(|r| (r.value(spec.x), r.mean))
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            if let Ok(fit) = fit_loglog_slope(&pts) {
                out.push(PanelSlope { panel: panel.clone(), method: m, fit });
            }
        }
    }
    out
}

/// Value of `spec.x` minimizing each method's mean error, per panel.
pub fn argmins(summary: &[SummaryRow], spec: &PlotSpec) -> Vec<(String, Method, f64, f64)> {
    let mut out = Vec::new();
    for (panel, rows) in grouped(summary, spec) {
        for m in Method::ALL {
            let best = rows
                .iter()
                .filter(|r| r.method == m)
                .min_by(|a, b| a.mean.total_cmp(&b.mean));
            if let Some(b) = best {
                out.push((panel.clone(), m, b.value(spec.x), b.mean));
            }
        }
    }
    out
}

/// Laplacian over Gaussian mean error for cells that differ only in family.
pub fn family_ratios(summary: &[SummaryRow]) -> Vec<(String, Method, f64)> {
    type Key = (Method, usize, usize, usize, usize, u64, u64);
    let key = |r: &SummaryRow| -> Key {
        (r.method, r.n, r.t, r.d0, r.d_embed, r.nu.to_bits(), r.alpha.to_bits())
    };
    let mut pairs: BTreeMap<Key, (Option<&SummaryRow>, Option<&SummaryRow>)> = BTreeMap::new();
    for r in summary {
        let e = pairs.entry(key(r)).or_default();
        match r.family {
            NoiseFamily::Gaussian => e.0 = Some(r),
            NoiseFamily::Laplacian => e.1 = Some(r),
        }
    }
    pairs
        .into_values()
        .filter_map(|(g, l)| {
            let (g, l) = (g?, l?);
            (g.mean > 0.0).then(|| {
                let label = format!("T={},{}", g.t, g.label(Param::Nu));
                (label, g.method, l.mean / g.mean)
            })
        })
        .collect()
}

/// Human-readable report for a sweep summary.
pub fn render_report(experiment: &str, summary: &[SummaryRow], spec: &PlotSpec) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment {experiment}: {} summary rows", summary.len());
    if spec.log_x && spec.log_y {
        for p in panel_slopes(summary, spec) {
            let _ = writeln!(
                s,
                "slope vs {} [{}] {}: {:.3} (r2 {:.3})",
                spec.x, p.panel, p.method, p.fit.slope, p.fit.r2
            );
        }
    } else {
        for (panel, m, x, mean) in argmins(summary, spec) {
            let _ = writeln!(s, "argmin {} [{panel}] {m}: {} (mean error {:.4})", spec.x, x, mean);
        }
    }
    for (label, m, ratio) in family_ratios(summary) {
        let _ = writeln!(s, "laplacian/gaussian [{label}] {m}: {ratio:.3}");
    }
    s
}
