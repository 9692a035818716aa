//! Python bindings. Matrices cross the boundary as lists of row lists.

use corrspec::harness::config::{Preset, SweepConfig};
use corrspec::harness::{run_sweep, summarize};
use corrspec::{embed, fourier, metrics, synth, Error};
use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(corrspec_py, DegenerateError, PyValueError, "Degenerate input such as a constant series.");

type Rows = Vec<Vec<f64>>;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Parse(_) => PyValueError::new_err(e.to_string()),
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::DegenerateSeries { .. } | Error::RankDeficient { .. } => DegenerateError::new_err(e.to_string()),
        Error::Numeric { .. } | Error::Integrity(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

fn matrix(rows: &Rows) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let t = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != t) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    Ok(DMatrix::from_fn(n, t, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn parse<T: std::str::FromStr>(s: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Pearson correlation network of a set of series.
#[pyclass(name = "CorrelationNetwork", module = "corrspec_py")]
struct PyCorrelationNetwork {
    inner: corrspec::CorrelationNetwork,
}

#[pymethods]
impl PyCorrelationNetwork {
    /// Builds the network from an `n x T` series matrix.
    #[new]
    fn new(series: Rows) -> PyResult<Self> {
        let z = matrix(&series)?;
        let inner = corrspec::corrnet::correlation_matrix(&z, corrspec::Provenance::Observed).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn matrix(&self) -> Rows {
        rows(self.inner.matrix())
    }

    /// Eigenvalues sorted by magnitude, then signed value.
    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        Ok(embed::sym_eig(self.inner.matrix()).map_err(to_py)?.values)
    }

    fn ase(&self, d: usize) -> PyResult<PyEmbedding> {
        embed::ase(self.inner.matrix(), d).map(PyEmbedding::from).map_err(to_py)
    }
}

/// Latent positions returned by an estimator.
#[pyclass(name = "Embedding", module = "corrspec_py")]
struct PyEmbedding {
    inner: embed::Embedding,
}

impl From<embed::Embedding> for PyEmbedding {
    fn from(inner: embed::Embedding) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyEmbedding {
    #[getter]
    fn method(&self) -> String {
        self.inner.method.to_string()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn spectrum(&self) -> Vec<f64> {
        self.inner.spectrum.clone()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    fn positions(&self) -> Rows {
        rows(&self.inner.x)
    }

    /// `(2,inf)` error against standardized true series after alignment.
    fn error(&self, ztilde_star: Rows) -> PyResult<f64> {
        metrics::embedding_error(&self.inner.x, &matrix(&ztilde_star)?).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Embedding(method={}, n={}, d={})", self.inner.method, self.inner.n(), self.inner.d())
    }
}

/// Draws Fourier-sparse signals; returns `(zstar, support)`.
#[pyfunction]
#[pyo3(signature = (n, t, d0, seed, normalization = "frobenius_sqrt_n"))]
fn generate_signals(n: usize, t: usize, d0: usize, seed: u64, normalization: &str) -> PyResult<(Rows, Vec<usize>)> {
    let normalization = match normalization {
        "frobenius_sqrt_n" => synth::Normalization::FrobeniusSqrtN,
        "rows_standardized" => synth::Normalization::RowsStandardized,
        other => return Err(PyValueError::new_err(format!("unknown normalization '{other}'"))),
    };
    let s = synth::generate_signals(&synth::SignalSpec {
        n,
        t,
        d0,
        normalization,
        seed,
    })
    .map_err(to_py)?;
    Ok((rows(&s.zstar), s.support))
}

/// Noise matrix for the given signals; returns `(noise, nu_i)`.
#[pyfunction]
#[pyo3(signature = (zstar, nu, seed, family = "gaussian", row_scaling = "scaled_by_row_norm", alpha = 1.0))]
fn generate_noise(zstar: Rows, nu: f64, seed: u64, family: &str, row_scaling: &str, alpha: f64) -> PyResult<(Rows, Vec<f64>)> {
    let row_scaling = match row_scaling {
        "scaled_by_row_norm" => synth::RowScaling::ScaledByRowNorm,
        "constant" => synth::RowScaling::Constant,
        other => return Err(PyValueError::new_err(format!("unknown row scaling '{other}'"))),
    };
    let draw = synth::generate_noise(
        &matrix(&zstar)?,
        &synth::NoiseSpec {
            family: parse(family)?,
            nu,
            row_scaling,
            inflation: (alpha != 1.0).then_some(alpha),
            seed,
        },
    )
    .map_err(to_py)?;
    Ok((rows(&draw.noise), draw.nu))
}

#[pyfunction]
fn standardize(z: Rows) -> PyResult<Rows> {
    corrspec::corrnet::standardize(&matrix(&z)?).map(|m| rows(&m)).map_err(to_py)
}

#[pyfunction]
fn correlation_matrix(z: Rows) -> PyResult<Rows> {
    let r = corrspec::corrnet::correlation_matrix(&matrix(&z)?, corrspec::Provenance::Observed).map_err(to_py)?;
    Ok(rows(r.matrix()))
}

/// Adjacency spectral embedding of a symmetric matrix.
#[pyfunction]
fn ase(a: Rows, d: usize) -> PyResult<PyEmbedding> {
    embed::ase(&matrix(&a)?, d).map(PyEmbedding::from).map_err(to_py)
}

#[pyfunction]
fn pca_embed(z: Rows, d: usize) -> PyResult<PyEmbedding> {
    embed::pca_embed(&matrix(&z)?, d).map(PyEmbedding::from).map_err(to_py)
}

#[pyfunction]
fn naive_embed(z: Rows) -> PyResult<PyEmbedding> {
    embed::naive_embed(&matrix(&z)?).map(PyEmbedding::from).map_err(to_py)
}

#[pyfunction]
fn dft(row: Vec<f64>) -> Vec<Complex64> {
    fourier::dft(&row)
}

/// Real Fourier representation `(1/sqrt T) F K^{1/2}` of standardized rows.
#[pyfunction]
fn latent_target(ztilde: Rows) -> PyResult<Rows> {
    fourier::latent_target(&matrix(&ztilde)?).map(|m| rows(&m)).map_err(to_py)
}

#[pyfunction]
fn embedding_error(estimate: Rows, ztilde_star: Rows) -> PyResult<f64> {
    metrics::embedding_error(&matrix(&estimate)?, &matrix(&ztilde_star)?).map_err(to_py)
}

/// Returns `{"error_2inf", "error_fro", "sin_theta"}`; `sin_theta` may be `None`.
#[pyfunction]
fn evaluate<'py>(py: Python<'py>, estimate: Rows, target: Rows) -> PyResult<Bound<'py, PyDict>> {
    let e = metrics::evaluate(&matrix(&estimate)?, &matrix(&target)?).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("error_2inf", e.error_2inf)?;
    out.set_item("error_fro", e.error_fro)?;
    out.set_item("sin_theta", e.sin_theta)?;
    Ok(out)
}

/// Runs a preset sweep; returns the result table as CSV text.
#[pyfunction]
#[pyo3(signature = (preset, trials = None, full = false, workers = 1, seed = None))]
fn run_preset(preset: &str, trials: Option<usize>, full: bool, workers: usize, seed: Option<u64>) -> PyResult<String> {
    let mut cfg = SweepConfig::preset(parse::<Preset>(preset)?, full);
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    let table = run_sweep(&cfg, workers).map_err(to_py)?;
    summarize(&table).map_err(to_py)?;
    Ok(table.to_csv(true))
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    Preset::ALL.iter().map(|p| p.as_str()).collect()
}

#[pymodule]
fn corrspec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DegenerateError", m.py().get_type::<DegenerateError>())?;
    m.add_class::<PyCorrelationNetwork>()?;
    m.add_class::<PyEmbedding>()?;
    m.add_function(wrap_pyfunction!(generate_signals, m)?)?;
    m.add_function(wrap_pyfunction!(generate_noise, m)?)?;
    m.add_function(wrap_pyfunction!(standardize, m)?)?;
    m.add_function(wrap_pyfunction!(correlation_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(ase, m)?)?;
    m.add_function(wrap_pyfunction!(pca_embed, m)?)?;
    m.add_function(wrap_pyfunction!(naive_embed, m)?)?;
    m.add_function(wrap_pyfunction!(dft, m)?)?;
    m.add_function(wrap_pyfunction!(latent_target, m)?)?;
    m.add_function(wrap_pyfunction!(embedding_error, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    Ok(())
}
