//! Procrustes alignment and error metrics.

use nalgebra::{DMatrix, QR};

use crate::corrnet::signal_power;
use crate::error::{Error, Result};
use crate::linalg::svd;

const ORTHONORMAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct AlignmentResult {
    /// Orthogonal `p x p` matrix `W` minimizing `||[Y 0] W - target||_F`.
    pub rotation: DMatrix<f64>,
    pub residual_2inf: f64,
    pub residual_fro: f64,
}

/// Pads `y` with zero columns up to width `p`.
fn pad_columns(y: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(y.nrows(), p);
    out.columns_mut(0, y.ncols()).copy_from(y);
    out
}

/// Polar factor `U V^T` of a square matrix `m = U S V^T`.
fn polar(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let s = svd(&m)?;
    Ok(s.u.expect("requested") * s.v_t.expect("requested"))
}

/// Maximum Euclidean row norm.
pub fn two_inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.norm()).fold(0.0, f64::max)
}

/// Orthogonal Procrustes alignment of `[y 0]` onto `target`.
///
/// The rotation minimizes the Frobenius residual; the `(2,inf)` residual is
/// reported at that rotation.
pub fn procrustes_align(y: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<AlignmentResult> {
    check_shapes(y, target)?;
    let p = target.ncols();
    let padded = pad_columns(y, p);
    let rotation = polar(padded.transpose() * target)?;
    let residual = padded * &rotation - target;
    Ok(AlignmentResult {
        residual_2inf: two_inf_norm(&residual),
        residual_fro: residual.norm(),
        rotation,
    })
}

fn check_shapes(y: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<()> {
    if y.nrows() != target.nrows() {
        return Err(Error::domain(format!(
            "row count mismatch: estimate has {}, target has {}",
            y.nrows(),
            target.nrows()
        )));
    }
    if y.ncols() > target.ncols() {
        return Err(Error::domain(format!(
            "estimate has {} columns, more than the target's {}",
            y.ncols(),
            target.ncols()
        )));
    }
    Ok(())
}

/// Coordinates of the rows of `m` in an orthonormal basis of its row space
/// when that is cheaper (`cols > rows`); row norms and inner products are
/// preserved.
fn row_space_coordinates(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.ncols() <= m.nrows() {
        return m.clone();
    }
    // m^T = Q R  =>  m = R^T Q^T
    QR::new(m.transpose()).r().transpose()
}

/// Row residuals `[y 0] W - target` at the Frobenius-optimal `W`, computed in
/// a basis of dimension at most `n` instead of `T`.
pub fn aligned_residual(y: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_shapes(y, target)?;
    let yr = row_space_coordinates(y);
    let zr = row_space_coordinates(target);
    let m = yr.ncols().max(zr.ncols());
    let yp = pad_columns(&yr, m);
    let zp = pad_columns(&zr, m);
    let w = polar(yp.transpose() * &zp)?;
    Ok(yp * w - zp)
}

/// Procrustes-aligned `(2,inf)` distance between an estimate and the
/// standardized true series.
pub fn embedding_error(estimate: &DMatrix<f64>, ztilde_star: &DMatrix<f64>) -> Result<f64> {
    Ok(two_inf_norm(&aligned_residual(estimate, ztilde_star)?))
}

fn check_orthonormal(u: &DMatrix<f64>, name: &str) -> Result<()> {
    let gram = u.transpose() * u;
    let defect = (gram - DMatrix::identity(u.ncols(), u.ncols())).amax();
    if defect > ORTHONORMAL_TOL {
        return Err(Error::domain(format!("{name} is not column-orthonormal (defect {defect:e})")));
    }
    Ok(())
}

/// Largest principal-angle sine between two `d`-dimensional subspaces,
/// `||(I - U U^T) U*||_2`.
pub fn sin_theta_distance(u: &DMatrix<f64>, ustar: &DMatrix<f64>) -> Result<f64> {
    if u.shape() != ustar.shape() {
        return Err(Error::domain(format!(
            "subspace bases have shapes {:?} and {:?}",
            u.shape(),
            ustar.shape()
        )));
    }
    check_orthonormal(u, "U")?;
    check_orthonormal(ustar, "U*")?;
    let resid = ustar - u * (u.transpose() * ustar);
    let top = svd(&resid)?.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    Ok(top.min(1.0))
}

/// `max_i max(|s_i/s*_i - 1|, |s*_i/s_i - 1|)` with `s` the observed and
/// `s*` the true per-row standard deviations.
pub fn sigma_ratio_diagnostic(z: &DMatrix<f64>, zstar: &DMatrix<f64>) -> Result<f64> {
    if z.shape() != zstar.shape() {
        return Err(Error::domain(format!("shapes differ: {:?} vs {:?}", z.shape(), zstar.shape())));
    }
    let obs = signal_power(z);
    let truth = signal_power(zstar);
    let mut worst: f64 = 0.0;
    for (i, (&a, &b)) in obs.0.iter().zip(&truth.0).enumerate() {
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::DegenerateSeries { row: i });
        }
        let ratio = (a / b).sqrt();
        worst = worst.max((ratio - 1.0).abs()).max((1.0 / ratio - 1.0).abs());
    }
    Ok(worst)
}

/// Orthonormal basis for the leading `k` left singular directions of `m`, or
/// `None` when `m` has numerical rank below `k`.
pub fn leading_left_basis(m: &DMatrix<f64>, k: usize) -> Result<Option<DMatrix<f64>>> {
    if k == 0 || k > m.nrows().min(m.ncols()) {
        return Ok(None);
    }
    let s = svd(m)?;
    let sv = &s.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    if sv[order[k - 1]] <= 1e-10 * sv[order[0]].max(f64::MIN_POSITIVE) {
        return Ok(None);
    }
    let u = s.u.as_ref().expect("requested");
    Ok(Some(DMatrix::from_fn(m.nrows(), k, |i, j| u[(i, order[j])])))
}

/// Distances between an estimate and a target, as reported by `evaluate`.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub error_2inf: f64,
    pub error_fro: f64,
    /// `None` when either input lacks rank `estimate.ncols()`.
    pub sin_theta: Option<f64>,
}

pub fn evaluate(estimate: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<Evaluation> {
    let resid = aligned_residual(estimate, target)?;
    let k = estimate.ncols();
    let sin_theta = match (leading_left_basis(estimate, k)?, leading_left_basis(target, k)?) {
        (Some(u), Some(ustar)) => Some(sin_theta_distance(&u, &ustar)?),
        _ => None,
    };
    Ok(Evaluation {
        error_2inf: two_inf_norm(&resid),
        error_fro: resid.norm(),
        sin_theta,
    })
}
