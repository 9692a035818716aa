//! Sparse-Fourier signal generation and observation noise.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corrnet::{correlation_matrix, numerical_rank, spectrum_summary, standardize, Provenance};
use crate::error::{Error, Result};
use crate::fourier::pair0;
use crate::rng::rng_from_seed;

/// Largest condition number accepted for standardized-mode signals.
pub const MAX_STANDARDIZED_KAPPA: f64 = 5.0;
/// Redraws attempted before standardized-mode generation gives up.
pub const MAX_STANDARDIZED_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Whole matrix rescaled to `||Z*||_F = sqrt(n)`.
    FrobeniusSqrtN,
    /// Every row centered and unit-norm, so `Z* = Z~*`.
    RowsStandardized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub d0: usize,
    pub normalization: Normalization,
    pub seed: u64,
}

impl SignalSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::domain("n must be at least 1"));
        }
        if self.t < 4 {
            return Err(Error::domain(format!("T = {} must be at least 4", self.t)));
        }
        if self.d0 < 2 || 2 * self.d0 >= self.t {
            return Err(Error::domain(format!(
                "d0 = {} must satisfy 2 <= d0 < T/2 = {}",
                self.d0,
                self.t as f64 / 2.0
            )));
        }
        if self.d0 > candidate_frequencies(self.t).len() {
            return Err(Error::domain(format!(
                "cannot draw {} distinct frequencies from 2..={}",
                self.d0,
                self.t / 2
            )));
        }
        Ok(())
    }
}

/// 1-indexed frequency indices eligible for the planted support: `2..=floor(T/2)`.
fn candidate_frequencies(t: usize) -> Vec<usize> {
    (2..=t / 2).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    Gaussian,
    Laplacian,
}

impl fmt::Display for NoiseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseFamily::Gaussian => "gaussian",
            NoiseFamily::Laplacian => "laplacian",
        })
    }
}

impl FromStr for NoiseFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseFamily::Gaussian),
            "laplacian" => Ok(NoiseFamily::Laplacian),
            other => Err(Error::domain(format!("unknown noise family '{other}' (gaussian, laplacian)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowScaling {
    /// Row `i` has variance `nu * ||Z*_i||^2`.
    ScaledByRowNorm,
    /// Every row has variance `nu`.
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    pub nu: f64,
    pub row_scaling: RowScaling,
    /// Variance factor `alpha >= 1` applied to one uniformly drawn row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflation: Option<f64>,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return Err(Error::domain(format!("nu = {} must be finite and >= 0", self.nu)));
        }
        if let Some(alpha) = self.inflation {
            if !(alpha >= 1.0) || !alpha.is_finite() {
                return Err(Error::domain(format!("alpha = {alpha} must be finite and >= 1")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Signals {
    pub zstar: DMatrix<f64>,
    /// Planted 1-indexed frequency indices, ascending.
    pub support: Vec<usize>,
    /// Number of redraws spent meeting the condition-number cap (standardized mode).
    pub redraws: usize,
}

#[derive(Debug, Clone)]
pub struct NoiseDraw {
    pub noise: DMatrix<f64>,
    /// Realized per-row variance `nu_i`.
    pub nu: Vec<f64>,
    pub inflated_row: Option<usize>,
}

/// Real series whose rows lie in the span of the Fourier elements `support`
/// (1-indexed, each `< T`), with real and imaginary parts of the planted
/// coefficients drawn i.i.d. standard normal and partners filled by
/// conjugation. A self-paired index gets a real coefficient.
pub fn signals_from_support(n: usize, t: usize, support: &[usize], rng: &mut ChaCha8Rng) -> Result<DMatrix<f64>> {
    for &k in support {
        if k < 2 || k > t {
            return Err(Error::domain(format!("support index {k} outside 2..={t}")));
        }
    }
    // Each frequency contributes (1/T)(F_k w^k + conj(F_k) w^-k) to the row,
    // which is real by construction: (2/T)(re cos - im sin), or (1/T) re cos
    // for a self-conjugate frequency.
    let basis: Vec<(Vec<f64>, Vec<f64>, bool)> = support
        .iter()
        .map(|&k| {
            let k0 = k - 1;
            let (c, s) = (0..t)
                .map(|j| {
                    let theta = 2.0 * std::f64::consts::PI * ((k0 * j) % t) as f64 / t as f64;
                    (theta.cos(), theta.sin())
                })
                .unzip();
            (c, s, pair0(k0, t) == k0)
        })
        .collect();
    let inv_t = 1.0 / t as f64;
    let mut z = DMatrix::zeros(n, t);
    let mut row = vec![0.0; t];
    for i in 0..n {
        row.iter_mut().for_each(|v| *v = 0.0);
        for (cos, sin, self_pair) in &basis {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            if *self_pair {
                let a = re * inv_t;
                row.iter_mut().zip(cos).for_each(|(v, c)| *v += a * c);
            } else {
                let (a, b) = (2.0 * re * inv_t, 2.0 * im * inv_t);
                for ((v, c), s) in row.iter_mut().zip(cos).zip(sin) {
                    *v += a * c - b * s;
                }
            }
        }
        for (j, v) in row.iter().enumerate() {
            z[(i, j)] = *v;
        }
    }
    Ok(z)
}

fn draw_support(t: usize, d0: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let pool = candidate_frequencies(t);
    let mut picked: Vec<usize> = sample(rng, pool.len(), d0).into_iter().map(|j| pool[j]).collect();
    picked.sort_unstable();
    picked
}

/// Draws `Z*` per `spec`; deterministic in `spec.seed`.
pub fn generate_signals(spec: &SignalSpec) -> Result<Signals> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let support = draw_support(spec.t, spec.d0, &mut rng);
    match spec.normalization {
        Normalization::FrobeniusSqrtN => {
            let mut z = signals_from_support(spec.n, spec.t, &support, &mut rng)?;
            let fro = z.norm();
            z *= (spec.n as f64).sqrt() / fro;
            Ok(Signals {
                zstar: z,
                support,
                redraws: 0,
            })
        }
        Normalization::RowsStandardized => {
            let rank = rank_of_support(spec.t, &support).min(spec.n);
            for attempt in 0..=MAX_STANDARDIZED_RETRIES {
                let z = standardize(&signals_from_support(spec.n, spec.t, &support, &mut rng)?)?;
                let r = correlation_matrix(&z, Provenance::TrueSignal)?;
                let kappa = match spectrum_summary(&r, rank) {
                    Ok(s) => s.kappa,
                    Err(Error::RankDeficient { .. }) => f64::INFINITY,
                    Err(e) => return Err(e),
                };
                if kappa <= MAX_STANDARDIZED_KAPPA {
                    return Ok(Signals {
                        zstar: z,
                        support,
                        redraws: attempt,
                    });
                }
            }
            Err(Error::Numeric {
                message: format!(
                    "no standardized draw with condition number <= {MAX_STANDARDIZED_KAPPA} (n={}, d0={})",
                    spec.n, spec.d0
                ),
                iterations: MAX_STANDARDIZED_RETRIES + 1,
            })
        }
    }
}

/// Dimension of the real span of the Fourier elements in `support` and their partners.
pub fn rank_of_support(t: usize, support: &[usize]) -> usize {
    support
        .iter()
        .map(|&k| if pair0(k - 1, t) == k - 1 { 1 } else { 2 })
        .sum()
}

/// Numerical rank of a signal matrix (via its correlation network).
pub fn signal_rank(zstar: &DMatrix<f64>) -> Result<usize> {
    numerical_rank(correlation_matrix(zstar, Provenance::TrueSignal)?.matrix(), 1e-9)
}

fn laplace(rng: &mut ChaCha8Rng, scale: f64) -> f64 {
    // Inverse CDF on u in (-1/2, 1/2).
    let u: f64 = rng.random::<f64>() - 0.5;
    let mag = -(1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln();
    scale * mag * u.signum()
}

/// Additive noise for `zstar`; deterministic in `spec.seed`.
pub fn generate_noise(zstar: &DMatrix<f64>, spec: &NoiseSpec) -> Result<NoiseDraw> {
    spec.validate()?;
    let (n, t) = zstar.shape();
    let mut rng = rng_from_seed(spec.seed);
    let inflated_row = match spec.inflation {
        Some(_) if n > 0 => Some(rng.random_range(0..n)),
        _ => None,
    };
    let nu: Vec<f64> = (0..n)
        .map(|i| {
            let base = match spec.row_scaling {
                RowScaling::ScaledByRowNorm => spec.nu * zstar.row(i).norm_squared(),
                RowScaling::Constant => spec.nu,
            };
            match (inflated_row, spec.inflation) {
                (Some(i0), Some(alpha)) if i0 == i => alpha * base,
                _ => base,
            }
        })
        .collect();
    let mut noise = DMatrix::zeros(n, t);
    for (i, &var) in nu.iter().enumerate() {
        if var == 0.0 {
            continue;
        }
        match spec.family {
            NoiseFamily::Gaussian => {
                let sd = var.sqrt();
                for j in 0..t {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    noise[(i, j)] = sd * g;
                }
            }
            NoiseFamily::Laplacian => {
                let b = (var / 2.0).sqrt();
                for j in 0..t {
                    noise[(i, j)] = laplace(&mut rng, b);
                }
            }
        }
    }
    Ok(NoiseDraw {
        noise,
        nu,
        inflated_row,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(n: usize, t: usize, d0: usize) -> SignalSpec {
        SignalSpec {
            n,
            t,
            d0,
            normalization: Normalization::FrobeniusSqrtN,
            seed: 11,
        }
    }

    #[test]
    fn synthesis_matches_inverse_dft() {
        use crate::fourier::idft;
        use num_complex::Complex64;
        for (t, support) in [(12usize, vec![2usize, 5, 7]), (9, vec![3, 4]), (16, vec![9, 2])] {
            let z = signals_from_support(3, t, &support, &mut rng_from_seed(5)).unwrap();
            let mut rng = rng_from_seed(5);
            for i in 0..3 {
                let mut c = vec![Complex64::new(0.0, 0.0); t];
                for &k in &support {
                    let (k0, p0) = (k - 1, pair0(k - 1, t));
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    if p0 == k0 {
                        c[k0] = Complex64::new(re, 0.0);
                    } else {
                        c[k0] = Complex64::new(re, im);
                        c[p0] = Complex64::new(re, -im);
                    }
                }
                for (j, v) in idft(&c).iter().enumerate() {
                    assert_abs_diff_eq!(z[(i, j)], v.re, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(generate_signals(&spec(10, 200, 150)).is_err());
        assert!(generate_signals(&spec(10, 200, 100)).is_err());
        assert!(generate_signals(&spec(10, 200, 1)).is_err());
        assert!(generate_signals(&spec(10, 3, 2)).is_err());
        assert!(generate_signals(&spec(0, 20, 2)).is_err());
        // T odd: d0 < T/2 but only floor(T/2) - 1 candidates.
        assert!(generate_signals(&spec(5, 9, 4)).is_err());
        assert!(generate_signals(&spec(5, 9, 3)).is_ok());
    }

    #[test]
    fn frobenius_normalization() {
        let s = generate_signals(&spec(200, 200, 10)).unwrap();
        assert_abs_diff_eq!(s.zstar.norm(), 200f64.sqrt(), epsilon = 1e-10);
        let r = signal_rank(&s.zstar).unwrap();
        assert!(r == 19 || r == 20, "rank {r}");
        assert_eq!(s.support.len(), 10);
        assert!(s.support.iter().all(|&k| (2..=100).contains(&k)));
    }

    #[test]
    fn deterministic_in_seed() {
        let a = generate_signals(&spec(20, 40, 3)).unwrap();
        let b = generate_signals(&spec(20, 40, 3)).unwrap();
        assert_eq!(a.zstar, b.zstar);
        assert_eq!(a.support, b.support);
        let mut other = spec(20, 40, 3);
        other.seed = 12;
        assert_ne!(generate_signals(&other).unwrap().zstar, a.zstar);
    }

    #[test]
    fn self_conjugate_frequency_is_rank_one() {
        let mut rng = rng_from_seed(5);
        // T = 8: index 5 pairs with itself.
        let z = signals_from_support(6, 8, &[5], &mut rng).unwrap();
        assert_eq!(signal_rank(&z).unwrap(), 1);
        assert_eq!(rank_of_support(8, &[5]), 1);
        let sv = z.singular_values();
        assert_eq!(sv.iter().filter(|&&s| s > 1e-8).count(), 1);
    }

    #[test]
    fn standardized_mode() {
        let mut s = spec(60, 64, 3);
        s.normalization = Normalization::RowsStandardized;
        let sig = generate_signals(&s).unwrap();
        for row in sig.zstar.row_iter() {
            assert_abs_diff_eq!(row.norm(), 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(row.sum(), 0.0, epsilon = 1e-10);
        }
        let r = correlation_matrix(&sig.zstar, Provenance::TrueSignal).unwrap();
        assert!(spectrum_summary(&r, 6).unwrap().kappa <= MAX_STANDARDIZED_KAPPA);
    }

    #[test]
    fn zero_noise_is_zero() {
        let s = generate_signals(&spec(5, 20, 2)).unwrap();
        let nd = generate_noise(
            &s.zstar,
            &NoiseSpec {
                family: NoiseFamily::Gaussian,
                nu: 0.0,
                row_scaling: RowScaling::ScaledByRowNorm,
                inflation: None,
                seed: 1,
            },
        )
        .unwrap();
        assert!(nd.noise.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn inflation_scales_one_row() {
        let s = generate_signals(&spec(30, 40, 3)).unwrap();
        let nu = 1e-3;
        let nd = generate_noise(
            &s.zstar,
            &NoiseSpec {
                family: NoiseFamily::Gaussian,
                nu,
                row_scaling: RowScaling::ScaledByRowNorm,
                inflation: Some(100.0),
                seed: 3,
            },
        )
        .unwrap();
        let i0 = nd.inflated_row.unwrap();
        for i in 0..30 {
            let base = nu * s.zstar.row(i).norm_squared();
            let want = if i == i0 { 100.0 * base } else { base };
            assert_abs_diff_eq!(nd.nu[i], want, epsilon = 1e-15);
        }
    }

    #[test]
    fn invalid_noise_specs() {
        let z = DMatrix::from_element(2, 4, 1.0);
        let mut ns = NoiseSpec {
            family: NoiseFamily::Laplacian,
            nu: -1.0,
            row_scaling: RowScaling::Constant,
            inflation: None,
            seed: 0,
        };
        assert!(generate_noise(&z, &ns).is_err());
        ns.nu = 1.0;
        ns.inflation = Some(0.5);
        assert!(generate_noise(&z, &ns).is_err());
    }

    #[test]
    fn sample_variance_tracks_nu() {
        // LLN check: |s^2 - nu_i| <= 5 nu_i / sqrt(T) at T = 5000.
        let t = 5000;
        let zstar = DMatrix::from_fn(4, t, |i, j| ((i + 1) as f64 * j as f64 * 0.01).sin() * (i + 1) as f64);
        for family in [NoiseFamily::Gaussian, NoiseFamily::Laplacian] {
            let nd = generate_noise(
                &zstar,
                &NoiseSpec {
                    family,
                    nu: 0.02,
                    row_scaling: RowScaling::ScaledByRowNorm,
                    inflation: None,
                    seed: 99,
                },
            )
            .unwrap();
            for i in 0..4 {
                let row = nd.noise.row(i);
                let mean = row.sum() / t as f64;
                let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1) as f64;
                assert!((var - nd.nu[i]).abs() <= 5.0 * nd.nu[i] / (t as f64).sqrt(), "{family} row {i}");
            }
        }
    }
}
