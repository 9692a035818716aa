//! Correlation networks built from noisy time series, their adjacency
//! spectral embedding, and Monte Carlo experiments measuring how well the
//! embedding recovers the real Fourier latent structure of the signals.
//!
//! Module map:
//!
//! * [`fourier`]: DFT, the conjugation permutation `K`, `K^{1/2}` and the real
//!   latent target of standardized series.
//! * [`synth`]: sparse-Fourier signals and Gaussian/Laplacian noise.
//! * [`corrnet`]: centering, signal power, standardization, correlation
//!   networks, the SNR `gamma` and spectrum summaries.
//! * [`embed`]: symmetric eigendecomposition, ASE, row-normalized PCA and the
//!   naive estimator.
//! * [`metrics`]: Procrustes alignment, `(2,inf)` error, `sin Theta` and the
//!   signal-power ratio diagnostic.
//! * [`harness`]: sweep configuration, presets, parallel trial execution,
//!   summaries, slope fits, CSV and SVG output.

pub mod corrnet;
pub mod embed;
pub mod error;
pub mod fourier;
pub mod harness;
pub mod io;
mod linalg;
pub mod metrics;
pub mod rng;
pub mod synth;

pub use corrnet::{CorrelationNetwork, PowerVector, Provenance};
pub use embed::{Embedding, Method};
pub use error::{Error, Result};
pub use fourier::{ConjugationPermutation, FourierCoefficients};
pub use synth::{NoiseFamily, NoiseSpec, Normalization, RowScaling, SignalSpec};
