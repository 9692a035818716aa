//! A single Monte Carlo trial and the sweep runner.

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::config::{CellParams, SweepConfig};
use crate::corrnet::{
    compute_gamma, correlation_matrix, signal_power, standardize, CorrelationNetwork, Provenance, SpectrumSummary,
};
use crate::embed::{ase, naive_embed, pca_embed, sym_eig, Method};
use crate::error::{Error, Result};
use crate::metrics::embedding_error;
use crate::rng::split_seed;
use crate::synth::{generate_noise, generate_signals, NoiseFamily, NoiseSpec, Normalization, RowScaling, SignalSpec};

/// Relative eigenvalue threshold used to read off the rank of the true network.
pub const RANK_REL_TOL: f64 = 1e-9;

const RETRY_STREAM: u64 = 0x5245_5452_59;

/// One estimator's outcome on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub experiment: String,
    pub cell: usize,
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub t: usize,
    pub d0: usize,
    pub d_embed: usize,
    pub nu: f64,
    pub alpha: f64,
    pub family: NoiseFamily,
    pub method: Method,
    pub error_2inf: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub lambda_d: f64,
    pub runtime_ms: f64,
    pub warnings: Vec<String>,
}

/// Settings shared by every cell of a sweep.
#[derive(Debug, Clone)]
pub struct TrialSettings {
    pub experiment: String,
    pub row_scaling: RowScaling,
    pub normalization: Normalization,
    pub methods: Vec<Method>,
}

impl TrialSettings {
    pub fn from_config(cfg: &SweepConfig) -> Self {
        Self {
            experiment: cfg.experiment.clone(),
            row_scaling: cfg.row_scaling,
            normalization: cfg.normalization,
            methods: cfg.ordered_methods(),
        }
    }
}

/// Seed of trial `trial` in cell `cell`.
pub fn trial_seed(master: u64, cell: usize, trial: usize) -> u64 {
    split_seed(split_seed(master, cell as u64), trial as u64)
}

struct Instance {
    zstar_tilde: DMatrix<f64>,
    z: DMatrix<f64>,
    rank: usize,
    spectrum: SpectrumSummary,
    gamma: f64,
}

fn draw_instance(cell: &CellParams, settings: &TrialSettings, seed: u64) -> Result<Instance> {
    let signals = generate_signals(&SignalSpec {
        n: cell.n,
        t: cell.t,
        d0: cell.d0,
        normalization: settings.normalization,
        seed: split_seed(seed, 0),
    })?;
    let noise = generate_noise(
        &signals.zstar,
        &NoiseSpec {
            family: cell.family,
            nu: cell.nu,
            row_scaling: settings.row_scaling,
            inflation: (cell.alpha > 1.0).then_some(cell.alpha),
            seed: split_seed(seed, 1),
        },
    )?;
    let zstar_tilde = standardize(&signals.zstar)?;
    let rstar = correlation_matrix(&signals.zstar, Provenance::TrueSignal)?;
    let (rank, spectrum) = true_spectrum(&rstar)?;
    let gamma = if cell.nu > 0.0 {
        compute_gamma(&signal_power(&signals.zstar), &noise.nu)?
    } else {
        f64::INFINITY
    };
    Ok(Instance {
        z: signals.zstar + noise.noise,
        zstar_tilde,
        rank,
        spectrum,
        gamma,
    })
}

fn true_spectrum(rstar: &CorrelationNetwork) -> Result<(usize, SpectrumSummary)> {
    let mut values = sym_eig(rstar.matrix())?.values;
    values.sort_by(|a, b| b.total_cmp(a));
    let rank = values.iter().filter(|&&v| v > RANK_REL_TOL * values[0]).count();
    values.truncate(rank);
    let lambda_d = values[rank - 1];
    Ok((
        rank,
        SpectrumSummary {
            kappa: values[0] / lambda_d,
            eigenvalues: values,
        },
    ))
}

fn estimate(method: Method, z: &DMatrix<f64>, r: Option<&CorrelationNetwork>, d: usize) -> Result<crate::embed::Embedding> {
    match method {
        Method::Ase => ase(r.expect("network built for ASE").matrix(), d),
        Method::Pca => pca_embed(z, d),
        Method::Naive => naive_embed(z),
    }
}

fn attempt(
    cell_index: usize,
    cell: &CellParams,
    settings: &TrialSettings,
    trial: usize,
    seed: u64,
    data_seed: u64,
) -> Result<Vec<TrialRecord>> {
    let inst = draw_instance(cell, settings, data_seed)?;
    let d = cell.d_embed.unwrap_or(inst.rank);
    if d > cell.n {
        return Err(Error::domain(format!("d_embed = {d} exceeds n = {}", cell.n)));
    }
    let network = if settings.methods.contains(&Method::Ase) {
        Some(correlation_matrix(&inst.z, Provenance::Observed)?)
    } else {
        None
    };
    let mut records = Vec::with_capacity(settings.methods.len());
    for &method in &settings.methods {
        let start = Instant::now();
        let emb = estimate(method, &inst.z, network.as_ref(), d)?;
        let error_2inf = embedding_error(&emb.x, &inst.zstar_tilde)?;
        records.push(TrialRecord {
            experiment: settings.experiment.clone(),
            cell: cell_index,
            trial,
            seed,
            n: cell.n,
            t: cell.t,
            d0: cell.d0,
            d_embed: d,
            nu: cell.nu,
            alpha: cell.alpha,
            family: cell.family,
            method,
            error_2inf,
            gamma: inst.gamma,
            kappa: inst.spectrum.kappa,
            lambda_d: inst.spectrum.lambda_d(),
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            warnings: emb.warnings,
        });
    }
    Ok(records)
}

/// Runs every requested estimator on one freshly drawn instance.
///
/// A failing draw is retried once with a seed derived from `seed`; the
/// retry is noted in the records' warnings. A second failure is returned.
pub fn run_trial(
    cell_index: usize,
    cell: &CellParams,
    settings: &TrialSettings,
    trial: usize,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    match attempt(cell_index, cell, settings, trial, seed, seed) {
        Ok(r) => Ok(r),
        Err(first) => {
            let retry_seed = split_seed(seed, RETRY_STREAM);
            log::warn!("cell {cell_index} trial {trial}: {first}; retrying with seed {retry_seed}");
            let mut records = attempt(cell_index, cell, settings, trial, seed, retry_seed).map_err(|second| {
                Error::Numeric {
                    message: format!("cell {cell_index} trial {trial} failed twice: {first}; then {second}"),
                    iterations: 2,
                }
            })?;
            for r in &mut records {
                r.warnings.insert(0, format!("retried with seed {retry_seed} after: {first}"));
            }
            Ok(records)
        }
    }
}

/// All trial records of a sweep, ordered by (cell, trial, method).
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub records: Vec<TrialRecord>,
}

/// Runs the full sweep on `workers` threads. Output is identical for any
/// worker count.
pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<ResultTable> {
    cfg.validate()?;
    let settings = TrialSettings::from_config(cfg);
    let cells = cfg.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?;
    let chunks: Vec<Vec<TrialRecord>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, t)| run_trial(c, &cells[c], &settings, t, trial_seed(cfg.master_seed, c, t)))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(ResultTable {
        records: chunks.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{Param, PlotSpec};

    fn small_config() -> SweepConfig {
        SweepConfig {
            experiment: "unit".into(),
            preset: None,
            n: vec![30],
            t: vec![40],
            d0: vec![3],
            nu: vec![0.0, 1e-4],
            alpha: vec![1.0],
            d_embed: vec![None],
            family: vec![NoiseFamily::Gaussian],
            row_scaling: RowScaling::ScaledByRowNorm,
            normalization: Normalization::FrobeniusSqrtN,
            methods: vec![Method::Naive, Method::Ase, Method::Pca],
            trials: 3,
            master_seed: 5,
            plot: PlotSpec {
                x: Param::Nu,
                panels: vec![],
                log_x: true,
                log_y: true,
            },
        }
    }

    #[test]
    fn noiseless_trial_is_exact() {
        let cfg = small_config();
        let settings = TrialSettings::from_config(&cfg);
        let cell = cfg.cells()[0];
        let recs = run_trial(0, &cell, &settings, 0, 77).unwrap();
        assert_eq!(recs.len(), 3);
        for r in &recs {
            assert_eq!(r.d_embed, 6);
            assert!(r.gamma.is_infinite());
            let tol = if r.method == Method::Naive { 1e-10 } else { 1e-6 };
            assert!(r.error_2inf <= tol, "{} {}", r.method, r.error_2inf);
        }
    }

    #[test]
    fn records_carry_cell_parameters() {
        let cfg = small_config();
        let table = run_sweep(&cfg, 2).unwrap();
        assert_eq!(table.records.len(), 2 * 3 * 3);
        let methods: Vec<Method> = table.records[..3].iter().map(|r| r.method).collect();
        assert_eq!(methods, vec![Method::Ase, Method::Pca, Method::Naive]);
        let r = &table.records[9];
        assert_eq!((r.cell, r.trial, r.n, r.t, r.d0, r.nu), (1, 0, 30, 40, 3, 1e-4));
        assert!(r.gamma > 0.0 && r.gamma.is_finite());
        assert!(r.kappa >= 1.0);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = small_config();
        let strip = |t: ResultTable| {
            t.records
                .into_iter()
                .map(|mut r| {
                    r.runtime_ms = 0.0;
                    r
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(run_sweep(&cfg, 1).unwrap()), strip(run_sweep(&cfg, 3).unwrap()));
    }
}
