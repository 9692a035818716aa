//! Centering, signal power, standardization and correlation networks.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::embed::sym_eig;
use crate::error::{Error, Result};

/// Overshoot of `|R[i,j]|` beyond 1 that is treated as rounding and clamped.
pub const CLAMP_SLACK: f64 = 1e-9;

/// Eigenvalues at or below this are considered zero by [`spectrum_summary`].
pub const EIGEN_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    TrueSignal,
    Observed,
}

/// A symmetric unit-diagonal matrix of pairwise Pearson correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationNetwork {
    matrix: DMatrix<f64>,
    provenance: Provenance,
}

impl CorrelationNetwork {
    /// Wraps an existing matrix after checking symmetry, unit diagonal and bounds.
    pub fn from_matrix(matrix: DMatrix<f64>, provenance: Provenance) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::domain(format!(
                "correlation matrix must be square, got {}x{}",
                n,
                matrix.ncols()
            )));
        }
        for i in 0..n {
            if (matrix[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::Integrity(format!("diagonal entry {i} is {}", matrix[(i, i)])));
            }
            for j in 0..i {
                if matrix[(i, j)] != matrix[(j, i)] {
                    return Err(Error::Integrity(format!("not symmetric at ({i},{j})")));
                }
                if matrix[(i, j)].abs() > 1.0 + 1e-12 {
                    return Err(Error::Integrity(format!("entry ({i},{j}) exceeds 1")));
                }
            }
        }
        Ok(Self { matrix, provenance })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// Per-row signal powers `sigma_i^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerVector(pub Vec<f64>);

impl PowerVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn row_mean(z: &DMatrix<f64>, i: usize) -> f64 {
    let t = z.ncols();
    let mut s = 0.0;
    for j in 0..t {
        s += z[(i, j)];
    }
    s / t as f64
}

/// `Z (I - J/T)`: subtracts each row's time average.
pub fn center_rows(z: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = z.clone();
    for i in 0..z.nrows() {
        let m = row_mean(z, i);
        for j in 0..z.ncols() {
            out[(i, j)] -= m;
        }
    }
    out
}

/// Mean squared deviation of each row about its time average.
pub fn signal_power(z: &DMatrix<f64>) -> PowerVector {
    let t = z.ncols() as f64;
    PowerVector(
        (0..z.nrows())
            .map(|i| {
                let m = row_mean(z, i);
                (0..z.ncols()).map(|j| (z[(i, j)] - m).powi(2)).sum::<f64>() / t
            })
            .collect(),
    )
}

/// Centers each row and scales it to unit Euclidean norm.
pub fn standardize(z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = center_rows(z);
    for i in 0..out.nrows() {
        let norm = out.row(i).norm();
        // A row whose centered norm is pure rounding noise is constant.
        let scale = z.row(i).amax().max(f64::MIN_POSITIVE);
        if norm == 0.0 || norm <= 1e-14 * scale * (z.ncols() as f64).sqrt() {
            return Err(Error::DegenerateSeries { row: i });
        }
        out.row_mut(i).unscale_mut(norm);
    }
    Ok(out)
}

fn network_from_factor(factor: &DMatrix<f64>, provenance: Provenance) -> Result<CorrelationNetwork> {
    let n = factor.nrows();
    let mut r = factor * factor.transpose();
    for i in 0..n {
        r[(i, i)] = 1.0;
        for j in 0..i {
            let mut v = r[(i, j)];
            if v.abs() > 1.0 {
                if v.abs() - 1.0 > CLAMP_SLACK {
                    return Err(Error::Integrity(format!(
                        "correlation ({i},{j}) = {v} overshoots [-1, 1]"
                    )));
                }
                v = v.signum();
            }
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(CorrelationNetwork { matrix: r, provenance })
}

/// Pearson correlation network of the rows of `z`.
pub fn correlation_matrix(z: &DMatrix<f64>, provenance: Provenance) -> Result<CorrelationNetwork> {
    network_from_factor(&standardize(z)?, provenance)
}

/// `min_i sigma_i^2 / nu_i`.
pub fn compute_gamma(sigma2: &PowerVector, nu: &[f64]) -> Result<f64> {
    if sigma2.0.len() != nu.len() {
        return Err(Error::domain(format!(
            "{} signal powers but {} noise parameters",
            sigma2.0.len(),
            nu.len()
        )));
    }
    if sigma2.0.is_empty() {
        return Err(Error::domain("empty power vector"));
    }
    let mut gamma = f64::INFINITY;
    for (i, (&s, &v)) in sigma2.0.iter().zip(nu).enumerate() {
        if !(v > 0.0) {
            return Err(Error::domain(format!("noise parameter nu_{i} = {v} must be positive")));
        }
        gamma = gamma.min(s / v);
    }
    Ok(gamma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    /// Leading `d` eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// `lambda_1 / lambda_d`.
    pub kappa: f64,
}

impl SpectrumSummary {
    pub fn lambda_d(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }
}

/// Leading eigenvalues of a correlation network and its condition number at rank `d`.
pub fn spectrum_summary(r: &CorrelationNetwork, d: usize) -> Result<SpectrumSummary> {
    let n = r.n();
    if d == 0 || d > n {
        return Err(Error::domain(format!("rank {d} outside 1..={n}")));
    }
    let mut values = sym_eig(r.matrix())?.values;
    values.sort_by(|a, b| b.total_cmp(a));
    values.truncate(d);
    let lambda_d = values[d - 1];
    if lambda_d <= EIGEN_FLOOR {
        return Err(Error::RankDeficient { index: d, value: lambda_d });
    }
    Ok(SpectrumSummary {
        kappa: values[0] / lambda_d,
        eigenvalues: values,
    })
}

/// Number of eigenvalues of a PSD matrix above `rel_tol * lambda_max`.
pub fn numerical_rank(r: &DMatrix<f64>, rel_tol: f64) -> Result<usize> {
    let values = sym_eig(r)?.values;
    let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(values.iter().filter(|&&v| v > rel_tol * top).count())
}

/// Row norms, as a vector.
pub fn row_norms(z: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(z.nrows(), z.row_iter().map(|r| r.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, data)
    }

    #[test]
    fn center_simple_and_idempotent() {
        let c = center_rows(&m(1, 3, &[1.0, 2.0, 3.0]));
        assert_eq!(c, m(1, 3, &[-1.0, 0.0, 1.0]));
        let cc = center_rows(&c);
        assert!((cc - c).amax() <= 1e-12);
    }

    #[test]
    fn center_matches_loop_oracle() {
        let z = m(3, 5, &[0.3, -1.2, 4.0, 2.2, 0.0, 1.0, 1.0, 2.0, 3.0, 5.0, -7.5, 0.25, 3.0, 8.0, -1.0]);
        let c = center_rows(&z);
        for i in 0..3 {
            let mut mean = 0.0;
            for j in 0..5 {
                mean += z[(i, j)] / 5.0;
            }
            for j in 0..5 {
                assert_abs_diff_eq!(c[(i, j)], z[(i, j)] - mean, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn power_cases() {
        let p = signal_power(&m(2, 3, &[1.0, 2.0, 3.0, 4.0, 4.0, 4.0]));
        assert_abs_diff_eq!(p.0[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(p.0[1], 0.0);
        // two-pass oracle on an irregular row
        let row = [0.1, 7.0, -3.3, 2.25, 9.5, -0.75];
        let mean = row.iter().sum::<f64>() / 6.0;
        let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 6.0;
        assert_abs_diff_eq!(signal_power(&m(1, 6, &row)).0[0], var, epsilon = 1e-12);
    }

    #[test]
    fn standardize_simple() {
        let s = standardize(&m(1, 3, &[1.0, 2.0, 3.0])).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s[(0, 0)], -h, epsilon = 1e-15);
        assert_abs_diff_eq!(s[(0, 1)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s[(0, 2)], h, epsilon = 1e-15);
    }

    #[test]
    fn constant_row_is_degenerate() {
        let z = m(3, 3, &[1.0, 2.0, 4.0, 5.0, 5.0, 5.0, 0.0, 1.0, 0.0]);
        assert!(matches!(standardize(&z), Err(Error::DegenerateSeries { row: 1 })));
        assert!(matches!(
            correlation_matrix(&z, Provenance::Observed),
            Err(Error::DegenerateSeries { row: 1 })
        ));
    }

    #[test]
    fn identical_and_negated_rows() {
        let z = m(3, 4, &[1.0, 3.0, 2.0, 5.0, 1.0, 3.0, 2.0, 5.0, -1.0, -3.0, -2.0, -5.0]);
        let r = correlation_matrix(&z, Provenance::Observed).unwrap();
        assert_abs_diff_eq!(r.matrix()[(0, 1)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.matrix()[(0, 2)], -1.0, epsilon = 1e-15);
        assert!(r.matrix().iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn integer_matrix_matches_pearson_loop() {
        let z = m(
            4,
            7,
            &[
                3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0, 5.0, 8.0, 9.0, 7.0, 9.0, 3.0, 2.0, 3.0, 8.0,
                4.0, 6.0, 2.0, 6.0, 4.0, 3.0, 3.0, 8.0, 3.0,
            ],
        );
        let r = correlation_matrix(&z, Provenance::Observed).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let (ma, mb) = (row_mean(&z, a), row_mean(&z, b));
                let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
                for t in 0..7 {
                    cov += (z[(a, t)] - ma) * (z[(b, t)] - mb);
                    va += (z[(a, t)] - ma).powi(2);
                    vb += (z[(b, t)] - mb).powi(2);
                }
                assert_abs_diff_eq!(r.matrix()[(a, b)], cov / (va * vb).sqrt(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn gamma_cases() {
        assert_eq!(compute_gamma(&PowerVector(vec![2.0]), &[0.5]).unwrap(), 4.0);
        assert_eq!(compute_gamma(&PowerVector(vec![1.0, 4.0]), &[1.0, 1.0]).unwrap(), 1.0);
        assert!(compute_gamma(&PowerVector(vec![1.0, 4.0]), &[1.0, 0.0]).is_err());
        assert!(compute_gamma(&PowerVector(vec![1.0]), &[-1.0]).is_err());
    }

    #[test]
    fn gamma_row_scaled_unit_rows() {
        // Centered unit-norm rows have sigma^2 = 1/T; row-scaled noise gives nu_i = nu.
        let t = 50;
        let nu = 1e-3;
        let z = standardize(&DMatrix::from_fn(3, t, |i, j| ((i + 1) as f64 * j as f64 * 0.37).sin())).unwrap();
        let nus: Vec<f64> = z.row_iter().map(|r| nu * r.norm_squared()).collect();
        let g = compute_gamma(&signal_power(&z), &nus).unwrap();
        assert_abs_diff_eq!(g, 1.0 / (nu * t as f64), epsilon = 1e-9);
    }

    #[test]
    fn identity_spectrum() {
        let r = CorrelationNetwork::from_matrix(DMatrix::identity(5, 5), Provenance::TrueSignal).unwrap();
        let s = spectrum_summary(&r, 5).unwrap();
        assert_abs_diff_eq!(s.kappa, 1.0, epsilon = 1e-12);
        assert!(spectrum_summary(&r, 6).is_err());
    }

    #[test]
    fn rank_deficient_spectrum() {
        let z = m(3, 4, &[1.0, 2.0, 3.0, 4.0, 2.0, 4.0, 6.0, 8.1, -1.0, 0.0, 0.0, 1.0]);
        let r = correlation_matrix(&z, Provenance::TrueSignal).unwrap();
        let s = spectrum_summary(&r, 3).unwrap();
        assert!(s.eigenvalues[0] >= 1.0 && s.eigenvalues[0] <= 3.0);
        // Rank one network.
        let z1 = m(3, 4, &[1.0, 2.0, 3.0, 4.0, 2.0, 4.0, 6.0, 8.0, -1.0, -2.0, -3.0, -4.0]);
        let r1 = correlation_matrix(&z1, Provenance::TrueSignal).unwrap();
        assert!(matches!(spectrum_summary(&r1, 2), Err(Error::RankDeficient { index: 2, .. })));
    }

    #[test]
    fn from_matrix_checks() {
        let bad = m(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(CorrelationNetwork::from_matrix(bad, Provenance::Observed).is_err());
        let bad = m(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        assert!(CorrelationNetwork::from_matrix(bad, Provenance::Observed).is_err());
    }
}
