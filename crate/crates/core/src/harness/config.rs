//! Sweep configuration and the named presets.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embed::Method;
use crate::error::{Error, Result};
use crate::synth::{NoiseFamily, Normalization, RowScaling};

/// A parameter a sweep can vary; used to address axes and panels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    N,
    #[serde(rename = "T")]
    T,
    D0,
    DEmbed,
    Nu,
    Alpha,
    Family,
}

impl Param {
    pub fn as_str(self) -> &'static str {
        match self {
            Param::N => "n",
            Param::T => "T",
            Param::D0 => "d0",
            Param::DEmbed => "d_embed",
            Param::Nu => "nu",
            Param::Alpha => "alpha",
            Param::Family => "family",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Param::N => "number of series n",
            Param::T => "series length T",
            Param::D0 => "signal frequencies d0",
            Param::DEmbed => "embedding dimension d",
            Param::Nu => "variance parameter nu",
            Param::Alpha => "variance factor alpha",
            Param::Family => "noise family",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    AppendixNoise,
    AppendixDimsel,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Fig1,
        Preset::Fig2,
        Preset::Fig3,
        Preset::Fig4,
        Preset::AppendixNoise,
        Preset::AppendixDimsel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::AppendixNoise => "appendix_noise",
            Preset::AppendixDimsel => "appendix_dimsel",
        }
    }

    pub fn names() -> String {
        Preset::ALL.iter().map(|p| p.as_str()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown figure id '{s}'; valid ids: {}", Preset::names())))
    }
}

/// Axis layout for the plots of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub x: Param,
    /// One panel per distinct combination of these parameters.
    #[serde(default)]
    pub panels: Vec<Param>,
    #[serde(default = "yes")]
    pub log_x: bool,
    #[serde(default = "yes")]
    pub log_y: bool,
}

fn yes() -> bool {
    true
}

fn default_alpha() -> Vec<f64> {
    vec![1.0]
}

fn default_d_embed() -> Vec<Option<usize>> {
    vec![None]
}

fn default_family() -> Vec<NoiseFamily> {
    vec![NoiseFamily::Gaussian]
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

/// Declarative description of a Monte Carlo sweep: the cross product of all
/// grids, `trials` repetitions per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    pub n: Vec<usize>,
    #[serde(rename = "T")]
    pub t: Vec<usize>,
    pub d0: Vec<usize>,
    pub nu: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: Vec<f64>,
    /// `null` embeds at the rank of the true correlation network.
    #[serde(default = "default_d_embed")]
    pub d_embed: Vec<Option<usize>>,
    #[serde(default = "default_family")]
    pub family: Vec<NoiseFamily>,
    pub row_scaling: RowScaling,
    pub normalization: Normalization,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    pub trials: usize,
    pub master_seed: u64,
    pub plot: PlotSpec,
}

/// One point of the parameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub d0: usize,
    pub d_embed: Option<usize>,
    pub nu: f64,
    pub alpha: f64,
    pub family: NoiseFamily,
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        Err(Error::domain(format!("grid '{name}' is empty")))
    } else {
        Ok(())
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::domain("trials must be at least 1"));
        }
        nonempty("n", &self.n)?;
        nonempty("T", &self.t)?;
        nonempty("d0", &self.d0)?;
        nonempty("nu", &self.nu)?;
        nonempty("alpha", &self.alpha)?;
        nonempty("d_embed", &self.d_embed)?;
        nonempty("family", &self.family)?;
        nonempty("methods", &self.methods)?;
        if let Some(nu) = self.nu.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::domain(format!("nu = {nu} must be finite and >= 0")));
        }
        if let Some(a) = self.alpha.iter().find(|v| !(**v >= 1.0) || !v.is_finite()) {
            return Err(Error::domain(format!("alpha = {a} must be finite and >= 1")));
        }
        for &n in &self.n {
            for &t in &self.t {
                for &d0 in &self.d0 {
                    if n < 1 || t < 4 || d0 < 2 || 2 * d0 >= t {
                        return Err(Error::domain(format!("invalid cell n={n}, T={t}, d0={d0}: need 2 <= d0 < T/2")));
                    }
                }
                for d in self.d_embed.iter().flatten() {
                    if *d == 0 || *d > n.min(t) {
                        return Err(Error::domain(format!("d_embed = {d} outside 1..={}", n.min(t))));
                    }
                }
            }
        }
        Ok(())
    }

    /// Methods in canonical output order, deduplicated.
    pub fn ordered_methods(&self) -> Vec<Method> {
        let mut m = self.methods.clone();
        m.sort();
        m.dedup();
        m
    }

    /// The grid cross product in output order (`n`, `T`, `d0`, `nu`,
    /// `alpha`, `family`, `d_embed`; outermost first).
    pub fn cells(&self) -> Vec<CellParams> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &t in &self.t {
                for &d0 in &self.d0 {
                    for &nu in &self.nu {
                        for &alpha in &self.alpha {
                            for &family in &self.family {
                                for &d_embed in &self.d_embed {
                                    out.push(CellParams {
                                        n,
                                        t,
                                        d0,
                                        d_embed,
                                        nu,
                                        alpha,
                                        family,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text).map_err(|e| Error::Parse(format!("sweep config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Same sweep with noise switched off and the embedding dimension set to the true rank.
    pub fn noiseless(&self) -> Self {
        let mut c = self.clone();
        c.experiment = format!("{}_noiseless", self.experiment);
        c.nu = vec![0.0];
        c.d_embed = vec![None];
        c
    }

    pub fn preset(preset: Preset, full: bool) -> Self {
        presets::build(preset, full)
    }
}

/// `count` points spaced evenly in `log10` from `10^lo` to `10^hi`.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![10f64.powf(lo)],
        _ => (0..count)
            .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64))
            .collect(),
    }
}

mod presets {
    use super::*;

    // Grids the figures show but do not tabulate are approximations of the
    // plotted ranges; every value is written to the output CSV.
    pub(super) fn build(preset: Preset, full: bool) -> SweepConfig {
        let base = SweepConfig {
            experiment: preset.as_str().to_string(),
            preset: Some(preset),
            n: vec![200],
            t: vec![200],
            d0: vec![10],
            nu: vec![1e-4],
            alpha: vec![1.0],
            d_embed: vec![None],
            family: vec![NoiseFamily::Gaussian],
            row_scaling: RowScaling::ScaledByRowNorm,
            normalization: Normalization::FrobeniusSqrtN,
            methods: Method::ALL.to_vec(),
            trials: 50,
            master_seed: 20_240_601,
            plot: PlotSpec {
                x: Param::Nu,
                panels: vec![],
                log_x: true,
                log_y: true,
            },
        };
        match preset {
            Preset::Fig1 => SweepConfig {
                d0: vec![10, 20, 30, 50],
                nu: logspace(-6.0, -2.5, 8),
                plot: PlotSpec {
                    panels: vec![Param::D0],
                    ..base.plot.clone()
                },
                ..base
            },
            Preset::Fig2 => SweepConfig {
                t: vec![500],
                d0: vec![20],
                nu: vec![1e-6, 1e-5, 1e-4],
                alpha: logspace(0.0, 3.0, 7),
                plot: PlotSpec {
                    x: Param::Alpha,
                    panels: vec![Param::Nu],
                    log_x: true,
                    log_y: true,
                },
                ..base
            },
            Preset::Fig3 => SweepConfig {
                n: vec![if full { 1200 } else { 300 }],
                t: vec![if full { 1800 } else { 600 }],
                d0: if full { vec![5, 10, 20, 40, 80] } else { vec![5, 10, 20, 40] },
                nu: vec![1e-5, 1e-4, 1e-3],
                trials: if full { 50 } else { 20 },
                plot: PlotSpec {
                    x: Param::D0,
                    panels: vec![Param::Nu],
                    log_x: true,
                    log_y: true,
                },
                ..base
            },
            Preset::Fig4 => SweepConfig {
                n: if full { vec![100, 200, 400, 800, 1200] } else { vec![100, 150, 200, 300] },
                t: vec![if full { 1000 } else { 500 }],
                d0: vec![2, 4, 6],
                nu: vec![1e-4],
                row_scaling: RowScaling::Constant,
                normalization: Normalization::RowsStandardized,
                trials: if full { 50 } else { 20 },
                plot: PlotSpec {
                    x: Param::N,
                    panels: vec![Param::D0],
                    log_x: true,
                    log_y: true,
                },
                ..base
            },
            Preset::AppendixNoise => SweepConfig {
                n: vec![100],
                t: vec![100, 500, 1000],
                d0: vec![10],
                nu: logspace(-6.0, -2.0, 9),
                family: vec![NoiseFamily::Gaussian, NoiseFamily::Laplacian],
                row_scaling: RowScaling::Constant,
                plot: PlotSpec {
                    x: Param::Nu,
                    panels: vec![Param::Family, Param::T],
                    log_x: true,
                    log_y: true,
                },
                ..base
            },
            Preset::AppendixDimsel => SweepConfig {
                t: vec![200, 500, 1000],
                d0: vec![15],
                nu: vec![1e-3],
                d_embed: (1..=60).map(Some).collect(),
                row_scaling: RowScaling::Constant,
                methods: vec![Method::Ase, Method::Naive],
                trials: if full { 50 } else { 10 },
                plot: PlotSpec {
                    x: Param::DEmbed,
                    panels: vec![Param::T],
                    log_x: false,
                    log_y: false,
                },
                ..base
            },
        }
    }
}
