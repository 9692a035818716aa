//! Checked wrappers around the nalgebra decompositions.
//!
//! nalgebra's SVD can return a wrong factorization for some rank-deficient
//! inputs, and loses accuracy in the singular vectors when singular values
//! nearly coincide. Every result here is verified by reconstruction. A failed
//! check is retried with looser thresholds and then with faer's solver before
//! being reported as a numerical failure.

use nalgebra::{DMatrix, DVector, Dyn, SymmetricEigen, SVD};

use crate::error::{Error, Result};

pub(crate) const MAX_ITER: usize = 10_000;
const THRESHOLDS: [f64; 4] = [f64::EPSILON, 1e-14, 1e-12, 1e-10];

/// Accepted reconstruction and orthonormality defect for an `r x c` input.
fn tolerance(r: usize, c: usize) -> f64 {
    50.0 * f64::EPSILON * r.max(c).max(1) as f64
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn faer_svd(m: &DMatrix<f64>) -> Option<SVD<f64, Dyn, Dyn>> {
    let s = to_faer(m).thin_svd().ok()?;
    Some(SVD {
        u: Some(from_faer(s.U())),
        v_t: Some(from_faer(s.V()).transpose()),
        singular_values: DVector::from_iterator(s.S().dim(), s.S().column_vector().iter().copied()),
    })
}

fn faer_eigen(m: &DMatrix<f64>) -> Option<SymmetricEigen<f64, Dyn>> {
    let e = to_faer(m).self_adjoint_eigen(faer::Side::Lower).ok()?;
    Some(SymmetricEigen {
        eigenvectors: from_faer(e.U()),
        eigenvalues: DVector::from_iterator(e.S().dim(), e.S().column_vector().iter().copied()),
    })
}

fn orthonormality_defect(q: &DMatrix<f64>) -> f64 {
    let k = q.ncols();
    (q.transpose() * q - DMatrix::identity(k, k)).amax()
}

/// Thin SVD with both factors.
pub(crate) fn svd(m: &DMatrix<f64>) -> Result<SVD<f64, Dyn, Dyn>> {
    let scale = m.norm().max(1.0);
    let tol = tolerance(m.nrows(), m.ncols());
    let mut worst = f64::NAN;
    let attempts = THRESHOLDS
        .iter()
        .map(|&eps| SVD::try_new(m.clone(), true, true, eps, MAX_ITER))
        .chain(std::iter::once_with(|| faer_svd(m)));
    for s in attempts {
        let Some(s) = s else {
            continue;
        };
        let (u, vt) = (s.u.as_ref().expect("requested"), s.v_t.as_ref().expect("requested"));
        let recon = (u * DMatrix::from_diagonal(&s.singular_values) * vt - m).amax() / scale;
        let defect = orthonormality_defect(u).max(orthonormality_defect(&vt.transpose()));
        if recon <= tol && defect <= tol {
            return Ok(s);
        }
        worst = recon.max(defect);
    }
    Err(Error::Numeric {
        message: format!("SVD of {}x{} input failed verification (defect {worst:e})", m.nrows(), m.ncols()),
        iterations: MAX_ITER,
    })
}

/// Symmetric eigendecomposition, verified by reconstruction.
pub(crate) fn symmetric_eigen(s: &DMatrix<f64>) -> Result<SymmetricEigen<f64, Dyn>> {
    let scale = s.norm().max(1.0);
    let tol = tolerance(s.nrows(), s.ncols());
    let mut worst = f64::NAN;
    let attempts = THRESHOLDS
        .iter()
        .map(|&eps| SymmetricEigen::try_new(s.clone(), eps, MAX_ITER))
        .chain(std::iter::once_with(|| faer_eigen(s)));
    for e in attempts {
        let Some(e) = e else {
            continue;
        };
        let v = &e.eigenvectors;
        let recon = (v * DMatrix::from_diagonal(&e.eigenvalues) * v.transpose() - s).amax() / scale;
        let defect = orthonormality_defect(v);
        if recon <= tol && defect <= tol {
            return Ok(e);
        }
        worst = recon.max(defect);
    }
    Err(Error::Numeric {
        message: format!("symmetric eigensolver failed on {0}x{0} input (defect {worst:e})", s.nrows()),
        iterations: MAX_ITER,
    })
}
