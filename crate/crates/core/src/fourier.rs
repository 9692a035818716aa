//! Discrete Fourier transform of real time series and the real latent
//! representation of their coefficients.
//!
//! Frequencies are 1-indexed in the public API: index `k` holds the
//! coefficient of frequency `k - 1`. The forward transform carries no
//! normalization, the inverse carries `1/T`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest imaginary part tolerated when projecting `F K^{1/2}` onto the reals.
pub const REALNESS_TOL: f64 = 1e-8;

/// Per-row DFT coefficients of an `n x T` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients {
    coeffs: DMatrix<Complex64>,
}

impl FourierCoefficients {
    /// Transforms every row of `rows`.
    pub fn from_rows(rows: &DMatrix<f64>) -> Self {
        let (n, t) = rows.shape();
        let table = twiddles(t, -1.0);
        let mut coeffs = DMatrix::from_element(n, t, Complex64::new(0.0, 0.0));
        let mut buf = vec![0.0; t];
        for i in 0..n {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = rows[(i, j)];
            }
            for k in 0..t {
                let mut acc = Complex64::new(0.0, 0.0);
                for (s, &x) in buf.iter().enumerate() {
                    acc += table[(k * s) % t] * x;
                }
                coeffs[(i, k)] = acc;
            }
        }
        Self { coeffs }
    }

    pub fn from_matrix(coeffs: DMatrix<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.coeffs
    }

    pub fn n(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn len(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest violation of `F[i,k] = conj(F[i, pair(k)])` over all rows and `k >= 2`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let t = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..self.n() {
            for k in 1..t {
                let p = t - k;
                worst = worst.max((self.coeffs[(i, k)] - self.coeffs[(i, p)].conj()).norm());
            }
        }
        worst
    }
}

// exp(sign * 2 pi i m / T) for m in 0..T; indices are reduced mod T before
// lookup so large products k*t never lose phase accuracy.
fn twiddles(t: usize, sign: f64) -> Vec<Complex64> {
    (0..t)
        .map(|m| {
            let theta = sign * 2.0 * std::f64::consts::PI * (m as f64) / (t as f64);
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect()
}

/// Forward DFT: `out[k] = sum_t x[t] exp(-2 pi i k t / T)` (0-indexed).
pub fn dft(row: &[f64]) -> Vec<Complex64> {
    let t = row.len();
    let table = twiddles(t, -1.0);
    (0..t)
        .map(|k| {
            row.iter()
                .enumerate()
                .fold(Complex64::new(0.0, 0.0), |acc, (s, &x)| acc + table[(k * s) % t] * x)
        })
        .collect()
}

/// Inverse DFT with the `1/T` factor, exact inverse of [`dft`].
pub fn idft(coeffs: &[Complex64]) -> Vec<Complex64> {
    let t = coeffs.len();
    let table = twiddles(t, 1.0);
    let scale = 1.0 / t as f64;
    (0..t)
        .map(|s| {
            coeffs
                .iter()
                .enumerate()
                .fold(Complex64::new(0.0, 0.0), |acc, (k, &c)| acc + table[(k * s) % t] * c)
                * scale
        })
        .collect()
}

/// Conjugate partner of the 1-indexed frequency `k`: `1` for `k = 1`, else `T - k + 2`.
pub fn pair_index(k: usize, t: usize) -> Result<usize> {
    if k == 0 || k > t {
        return Err(Error::domain(format!("frequency index {k} outside 1..={t}")));
    }
    Ok(if k == 1 { 1 } else { t - k + 2 })
}

// 0-indexed partner, no range check.
#[inline]
pub(crate) fn pair0(k: usize, t: usize) -> usize {
    if k == 0 {
        0
    } else {
        t - k
    }
}

/// The conjugation permutation on `T` frequencies: `K[1,1] = 1`, `K[s,t] = 1` iff `s + t = T + 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConjugationPermutation {
    t: usize,
}

impl ConjugationPermutation {
    pub fn new(t: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::domain("series length must be at least 1"));
        }
        Ok(Self { t })
    }

    pub fn len(&self) -> usize {
        self.t
    }

    pub fn is_empty(&self) -> bool {
        self.t == 0
    }

    /// Image of 0-indexed basis vector `k`.
    pub fn apply_index(&self, k: usize) -> usize {
        pair0(k, self.t)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.t, self.t, |s, c| {
            if pair0(c, self.t) == s {
                1.0
            } else {
                0.0
            }
        })
    }
}

pub fn build_k(t: usize) -> Result<ConjugationPermutation> {
    ConjugationPermutation::new(t)
}

/// Principal square root of `K`.
///
/// `K` is a symmetric involution, so its spectrum is `{+1, -1}`. Each
/// transposed pair `(l, pair(l))` contributes the unit eigenvectors
/// `(e_l + e_p)/sqrt 2` (eigenvalue `+1`) and `(e_l - e_p)/sqrt 2` (eigenvalue
/// `-1`); fixed points (`l = 1` and the Nyquist index for even `T`)
/// contribute `e_l` with eigenvalue `+1`. The root keeps `+1` and sends `-1`
/// to `+i`.
pub fn sqrt_k(t: usize) -> Result<DMatrix<Complex64>> {
    let k = ConjugationPermutation::new(t)?;
    let mut s = DMatrix::from_element(t, t, Complex64::new(0.0, 0.0));
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    for l in 0..t {
        let p = k.apply_index(l);
        if p == l {
            s[(l, l)] += one;
        } else if l < p {
            // Unit eigenvectors u = (e_l + e_p)/sqrt 2, w = (e_l - e_p)/sqrt 2.
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let u = [(l, h), (p, h)];
            let w = [(l, h), (p, -h)];
            for (&(a, ua), &(_, wa)) in u.iter().zip(&w) {
                for (&(b, ub), &(_, wb)) in u.iter().zip(&w) {
                    s[(a, b)] += one * (ua * ub) + i * (wa * wb);
                }
            }
        }
    }
    Ok(s)
}

/// `F K^{1/2}` with the (vanishing) imaginary part removed.
///
/// Entry `(i, k)` equals `Re F[i,k] - Im F[i,k]`. Fails if the product is not
/// real to [`REALNESS_TOL`] or the zero-frequency column is not zero, which
/// means the rows did not come from centered real series.
pub fn real_fourier_representation(f: &FourierCoefficients) -> Result<DMatrix<f64>> {
    let (n, t) = (f.n(), f.len());
    if t == 0 {
        return Ok(DMatrix::zeros(n, 0));
    }
    let s = sqrt_k(t)?;
    let fm = f.matrix();
    let mut out = DMatrix::zeros(n, t);
    let mut worst_imag: f64 = 0.0;
    for i in 0..n {
        let scale = (0..t).map(|k| fm[(i, k)].norm_sqr()).sum::<f64>().sqrt().max(1.0);
        if fm[(i, 0)].norm() > REALNESS_TOL * scale {
            return Err(Error::Integrity(format!(
                "row {i} has nonzero mean (|F[i,1]| = {:e})",
                fm[(i, 0)].norm()
            )));
        }
        for k in 0..t {
            // Column k of K^{1/2} is supported on rows k and pair(k).
            let p = pair0(k, t);
            let mut v = fm[(i, k)] * s[(k, k)];
            if p != k {
                v += fm[(i, p)] * s[(p, k)];
            }
            worst_imag = worst_imag.max(v.im.abs() / scale);
            out[(i, k)] = v.re;
        }
    }
    if worst_imag > REALNESS_TOL {
        return Err(Error::Integrity(format!(
            "F K^(1/2) has imaginary part {worst_imag:e}; rows are not real"
        )));
    }
    Ok(out)
}

/// Real Fourier latent positions of standardized series, scaled so that
/// `X X^T = Z Z^T`.
pub fn latent_target(ztilde: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let t = ztilde.ncols();
    if t == 0 {
        return Err(Error::domain("empty series"));
    }
    for (i, row) in ztilde.row_iter().enumerate() {
        let mean = row.sum() / t as f64;
        let norm = row.norm();
        if mean.abs() > 1e-8 || (norm - 1.0).abs() > 1e-8 {
            return Err(Error::domain(format!(
                "row {i} is not standardized (mean {mean:e}, norm {norm})"
            )));
        }
    }
    let f = FourierCoefficients::from_rows(ztilde);
    Ok(real_fourier_representation(&f)? / (t as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_row_has_only_dc() {
        let out = dft(&[2.5; 6]);
        assert_abs_diff_eq!(out[0].re, 15.0, epsilon = 1e-12);
        for z in &out[1..] {
            assert!(z.norm() <= 1e-10);
        }
    }

    #[test]
    fn cosine_row_t8() {
        let t = 8;
        let row: Vec<f64> = (0..t)
            .map(|s| (2.0 * std::f64::consts::PI * s as f64 / t as f64).cos())
            .collect();
        let out = dft(&row);
        // Evaluated directly from the defining sum: T/2 at frequencies 1 and T-1.
        let expected = [0.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0, 4.0];
        for (z, e) in out.iter().zip(expected) {
            assert_abs_diff_eq!(z.re, e, epsilon = 1e-10);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn sine_row_t5_coefficients() {
        // sum_t sin(2 pi t/5) exp(-2 pi i t/5) = -5i/2; partner holds +5i/2.
        let row: Vec<f64> = (0..5)
            .map(|s| (2.0 * std::f64::consts::PI * s as f64 / 5.0).sin())
            .collect();
        let out = dft(&row);
        assert_abs_diff_eq!(out[1].im, -2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(out[4].im, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(out[1].re, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn idft_of_scaled_impulse_is_ones() {
        let mut coeffs = vec![c(0.0, 0.0); 7];
        coeffs[0] = c(7.0, 0.0);
        for z in idft(&coeffs) {
            assert_abs_diff_eq!(z.re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn idft_conjugate_symmetric_is_real() {
        let coeffs = vec![c(0.0, 0.0), c(1.0, 2.0), c(-0.5, 0.25), c(3.0, 0.0), c(-0.5, -0.25), c(1.0, -2.0)];
        for z in idft(&coeffs) {
            assert!(z.im.abs() <= 1e-10);
        }
    }

    #[test]
    fn pair_index_cases() {
        assert_eq!(pair_index(1, 8).unwrap(), 1);
        assert_eq!(pair_index(2, 8).unwrap(), 8);
        assert_eq!(pair_index(5, 8).unwrap(), 5);
        assert!(pair_index(0, 8).is_err());
        assert!(pair_index(9, 8).is_err());
    }

    #[test]
    fn k_small_cases() {
        let k4 = build_k(4).unwrap().to_dense();
        let ones: Vec<(usize, usize)> = (0..4)
            .flat_map(|s| (0..4).map(move |t| (s, t)))
            .filter(|&(s, t)| k4[(s, t)] == 1.0)
            .map(|(s, t)| (s + 1, t + 1))
            .collect();
        assert_eq!(ones, vec![(1, 1), (2, 4), (3, 3), (4, 2)]);

        let k5 = build_k(5).unwrap().to_dense();
        let ones: Vec<(usize, usize)> = (0..5)
            .flat_map(|s| (0..5).map(move |t| (s, t)))
            .filter(|&(s, t)| k5[(s, t)] == 1.0)
            .map(|(s, t)| (s + 1, t + 1))
            .collect();
        assert_eq!(ones, vec![(1, 1), (2, 5), (3, 4), (4, 3), (5, 2)]);
        assert!(build_k(0).is_err());
    }

    #[test]
    fn sqrt_k_one() {
        let s = sqrt_k(1).unwrap();
        assert_eq!(s[(0, 0)], c(1.0, 0.0));
    }

    #[test]
    fn sqrt_k_matches_projector_form() {
        // Independent route: (I + K)/2 + i (I - K)/2.
        for t in 1..=16 {
            let k = build_k(t).unwrap().to_dense();
            let s = sqrt_k(t).unwrap();
            for a in 0..t {
                for b in 0..t {
                    let id = if a == b { 1.0 } else { 0.0 };
                    let want = c((id + k[(a, b)]) / 2.0, (id - k[(a, b)]) / 2.0);
                    assert!((s[(a, b)] - want).norm() <= 1e-15, "T={t} ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn zero_coefficients_map_to_zero() {
        let f = FourierCoefficients::from_matrix(DMatrix::from_element(3, 6, c(0.0, 0.0)));
        let out = real_fourier_representation(&f).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uncentered_rows_rejected() {
        let z = DMatrix::from_row_slice(1, 4, &[1.0, 2.0, 3.0, 4.0]);
        let f = FourierCoefficients::from_rows(&z);
        assert!(matches!(real_fourier_representation(&f), Err(Error::Integrity(_))));
    }

    #[test]
    fn non_real_coefficients_rejected() {
        let mut m = DMatrix::from_element(1, 4, c(0.0, 0.0));
        m[(0, 1)] = c(1.0, 1.0);
        let f = FourierCoefficients::from_matrix(m);
        assert!(matches!(real_fourier_representation(&f), Err(Error::Integrity(_))));
    }

    #[test]
    fn single_sine_has_two_nonzero_latent_entries() {
        let t = 12;
        let raw: Vec<f64> = (0..t)
            .map(|s| (2.0 * std::f64::consts::PI * 3.0 * s as f64 / t as f64 + 0.4).sin())
            .collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let z = DMatrix::from_row_slice(1, t, &raw.iter().map(|x| x / norm).collect::<Vec<_>>());
        let x = latent_target(&z).unwrap();
        let nonzero: Vec<usize> = (0..t).filter(|&k| x[(0, k)].abs() > 1e-10).collect();
        assert_eq!(nonzero, vec![3, 9]);
    }

    #[test]
    fn latent_target_rejects_unstandardized() {
        let z = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        assert!(matches!(latent_target(&z), Err(Error::Domain(_))));
    }
}
