//! Minimal SVG line plots: mean error against the swept parameter, one line
//! per method, with a two-standard-error band.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::PlotSpec;
use super::stats::SummaryRow;
use crate::embed::Method;
use crate::error::{Error, Result};
use crate::io::write_atomic;

const WIDTH: f64 = 520.0;
const HEIGHT: f64 = 380.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 56.0;

fn style(m: Method) -> (&'static str, &'static str) {
    match m {
        Method::Ase => ("#1f77b4", "circle"),
        Method::Pca => ("#7b3294", "square"),
        Method::Naive => ("#2ca02c", "triangle"),
    }
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Option<Self> {
        let vals: Vec<f64> = values.filter(|v| v.is_finite() && (!log || *v > 0.0)).collect();
        if vals.is_empty() {
            return None;
        }
        let mut lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if log {
            lo = lo.log10().floor();
            hi = hi.log10().ceil();
            if hi <= lo {
                hi = lo + 1.0;
            }
        } else {
            if hi <= lo {
                hi = lo + 1.0;
            }
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
            if lo < 0.0 && vals.iter().all(|v| *v >= 0.0) {
                lo = 0.0;
            }
        }
        Some(Self { lo, hi, log })
    }

    fn frac(&self, v: f64) -> Option<f64> {
        if self.log {
            (v > 0.0).then(|| (v.log10() - self.lo) / (self.hi - self.lo))
        } else {
            Some((v - self.lo) / (self.hi - self.lo))
        }
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            (self.lo as i32..=self.hi as i32)
                .map(|e| (10f64.powi(e), format!("1e{e}")))
                .collect()
        } else {
            (0..=5)
                .map(|i| {
                    let v = self.lo + (self.hi - self.lo) * i as f64 / 5.0;
                    (v, format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string())
                })
                .collect()
        }
    }
}

fn px(ax: &Axis, v: f64) -> Option<f64> {
    ax.frac(v).map(|f| LEFT + f * (WIDTH - LEFT - RIGHT))
}

fn py(ax: &Axis, v: f64) -> Option<f64> {
    ax.frac(v).map(|f| HEIGHT - BOTTOM - f * (HEIGHT - TOP - BOTTOM))
}

fn marker(out: &mut String, shape: &str, x: f64, y: f64, color: &str) {
    let _ = match shape {
        "circle" => writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{color}"/>"#),
        "square" => writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="7" height="7" fill="{color}"/>"#,
            x - 3.5,
            y - 3.5
        ),
        _ => writeln!(
            out,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}"/>"#,
            x,
            y - 4.0,
            x - 4.0,
            y + 3.5,
            x + 4.0,
            y + 3.5
        ),
    };
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders one panel to an SVG document.
pub fn render_panel(rows: &[&SummaryRow], spec: &PlotSpec, title: &str) -> Result<String> {
    let mut by_method: BTreeMap<Method, Vec<&SummaryRow>> = BTreeMap::new();
    for r in rows {
        by_method.entry(r.method).or_default().push(r);
    }
    if by_method.is_empty() {
        return Err(Error::domain("nothing to plot: no methods in summary"));
    }
    let xa = Axis::fit(rows.iter().map(|r| r.value(spec.x)), spec.log_x)
        .ok_or_else(|| Error::domain("no plottable x values"))?;
    let ya = Axis::fit(
        rows.iter()
            .flat_map(|r| [r.mean, r.mean + 2.0 * r.sem, r.mean - 2.0 * r.sem].into_iter()),
        spec.log_y,
    )
    .ok_or_else(|| Error::domain("no plottable error values"))?;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<rect x="{x0}" y="{y1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for (v, label) in xa.ticks() {
        if let Some(x) = px(&xa, v) {
            let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{:.1}" stroke="black"/>"#, y0 + 5.0);
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.1}" text-anchor="middle">{label}</text>"#, y0 + 18.0);
        }
    }
    for (v, label) in ya.ticks() {
        if let Some(y) = py(&ya, v) {
            let _ = writeln!(s, r#"<line x1="{:.1}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{label}</text>"#, x0 - 8.0, y + 4.0);
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 14.0,
        spec.x.label()
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {:.1}) rotate(-90)" text-anchor="middle">(2,inf) error</text>"#,
        (y0 + y1) / 2.0
    );

    for (k, (method, pts)) in by_method.iter_mut().enumerate() {
        pts.sort_by(|a, b| a.value(spec.x).total_cmp(&b.value(spec.x)));
        let (color, shape) = style(*method);
        let lower_of = |r: &SummaryRow| {
            let v = r.mean - 2.0 * r.sem;
            if spec.log_y && v <= 0.0 {
                r.mean
            } else {
                v
            }
        };
        let upper: Vec<(f64, f64)> = pts
            .iter()
            .filter_map(|r| Some((px(&xa, r.value(spec.x))?, py(&ya, r.mean + 2.0 * r.sem)?)))
            .collect();
        let lower: Vec<(f64, f64)> = pts
            .iter()
            .rev()
            .filter_map(|r| Some((px(&xa, r.value(spec.x))?, py(&ya, lower_of(r))?)))
            .collect();
        if upper.len() > 1 {
            let poly: Vec<String> = upper.iter().chain(&lower).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#, poly.join(" "));
        }
        let line: Vec<(f64, f64)> = pts
            .iter()
            .filter_map(|r| Some((px(&xa, r.value(spec.x))?, py(&ya, r.mean)?)))
            .collect();
        let path: Vec<String> = line.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"/>"#,
            path.join(" ")
        );
        for (x, y) in &line {
            marker(&mut s, shape, *x, *y, color);
        }
        let ly = TOP + 14.0 + 16.0 * k as f64;
        marker(&mut s, shape, x0 + 14.0, ly - 4.0, color);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#, x0 + 24.0, method);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes one SVG per panel as `<experiment>_<panel>.svg` and returns the paths.
pub fn render_plot(summary: &[SummaryRow], spec: &PlotSpec, experiment: &str, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if summary.is_empty() {
        return Err(Error::domain("nothing to plot: empty summary"));
    }
    let mut panels: BTreeMap<Vec<String>, Vec<&SummaryRow>> = BTreeMap::new();
    let mut order: Vec<Vec<String>> = Vec::new();
    for r in summary {
        let key: Vec<String> = spec.panels.iter().map(|&p| r.label(p)).collect();
        if !panels.contains_key(&key) {
            order.push(key.clone());
        }
        panels.entry(key).or_default().push(r);
    }
    let mut written = Vec::new();
    for key in order {
        let name = if key.is_empty() { "all".to_string() } else { key.join("_") };
        let safe: String = name
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '-' })
            .collect();
        let title = if key.is_empty() {
            experiment.to_string()
        } else {
            format!("{experiment}: {}", key.join(", "))
        };
        let svg = render_panel(&panels[&key], spec, &title)?;
        let path = out_dir.join(format!("{experiment}_{safe}.svg"));
        write_atomic(&path, svg.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
