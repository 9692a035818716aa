//! Symmetric eigendecomposition and the three estimators of the standardized
//! signals: adjacency spectral embedding, row-normalized PCA and the naive
//! standardized series.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::corrnet::{center_rows, standardize};
use crate::error::{Error, Result};
use crate::linalg::{svd, symmetric_eigen};

const SYMMETRY_TOL: f64 = 1e-10;

/// Gap below which `|lambda_d|` and `|lambda_{d+1}|` count as tied.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ase,
    Pca,
    Naive,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Ase, Method::Pca, Method::Naive];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ase => "ase",
            Method::Pca => "pca",
            Method::Naive => "naive",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ase" => Ok(Method::Ase),
            "pca" => Ok(Method::Pca),
            "naive" => Ok(Method::Naive),
            other => Err(Error::domain(format!("unknown method '{other}' (ase, pca, naive)"))),
        }
    }
}

/// Eigenpairs sorted by the deterministic conventions of [`sym_eig`].
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

/// Index of the largest-magnitude coordinate (first one on ties).
fn pivot(col: nalgebra::DVectorView<'_, f64>) -> usize {
    let mut best = 0;
    for (i, v) in col.iter().enumerate() {
        if v.abs() > col[best].abs() {
            best = i;
        }
    }
    best
}

/// Full eigendecomposition of a symmetric matrix.
///
/// Pairs are ordered by `|lambda|` descending, then by signed value
/// descending, then by the position of the eigenvector's largest-magnitude
/// coordinate. Each eigenvector is signed so that coordinate is positive.
pub fn sym_eig(s: &DMatrix<f64>) -> Result<EigenPairs> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::domain(format!("matrix is {}x{}, not square", n, s.ncols())));
    }
    let asym = (s - s.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::domain(format!("matrix is not symmetric (max |S - S^T| = {asym:e})")));
    }
    if n == 0 {
        return Ok(EigenPairs {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let eig = symmetric_eigen(s)?;

    let mut vectors = eig.eigenvectors;
    let mut pivots = Vec::with_capacity(n);
    for j in 0..n {
        let p = pivot(vectors.column(j));
        if vectors[(p, j)] < 0.0 {
            vectors.column_mut(j).neg_mut();
        }
        pivots.push(p);
    }
    let values = eig.eigenvalues;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then_with(|| values[b].total_cmp(&values[a]))
            .then_with(|| pivots[a].cmp(&pivots[b]))
    });
    Ok(EigenPairs {
        values: order.iter().map(|&j| values[j]).collect(),
        vectors: DMatrix::from_fn(n, n, |i, k| vectors[(i, order[k])]),
    })
}

/// An `n x d` matrix of latent positions together with how it was produced.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub x: DMatrix<f64>,
    pub method: Method,
    /// Retained eigenvalues (ASE) or singular values (PCA), by decreasing magnitude.
    /// Empty for the naive estimator.
    pub spectrum: Vec<f64>,
    pub warnings: Vec<String>,
}

impl Embedding {
    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }
}

/// Adjacency spectral embedding `V_d |Lambda_d|^{1/2}`.
pub fn ase(a: &DMatrix<f64>, d: usize) -> Result<Embedding> {
    let n = a.nrows();
    if d == 0 || d > n {
        return Err(Error::domain(format!("embedding dimension {d} outside 1..={n}")));
    }
    let eig = sym_eig(a)?;
    let mut warnings = Vec::new();
    if d < n && (eig.values[d - 1].abs() - eig.values[d].abs()).abs() <= TIE_TOL {
        warnings.push(format!(
            "eigenvalue tie at position {d}: |{:e}| vs |{:e}|",
            eig.values[d - 1],
            eig.values[d]
        ));
    }
    let mut x = eig.vectors.columns(0, d).into_owned();
    for (j, lambda) in eig.values.iter().take(d).enumerate() {
        x.column_mut(j).scale_mut(lambda.abs().sqrt());
    }
    Ok(Embedding {
        x,
        method: Method::Ase,
        spectrum: eig.values[..d].to_vec(),
        warnings,
    })
}

fn normalize_rows(mut x: DMatrix<f64>) -> Result<DMatrix<f64>> {
    for i in 0..x.nrows() {
        let norm = x.row(i).norm();
        if norm <= 1e-12 {
            return Err(Error::DegenerateSeries { row: i });
        }
        x.row_mut(i).unscale_mut(norm);
    }
    Ok(x)
}

/// Rank-`d` scaled PCA of the centered series, followed by row normalization.
pub fn pca_embed(z: &DMatrix<f64>, d: usize) -> Result<Embedding> {
    let (n, t) = z.shape();
    if d == 0 || d > n.min(t) {
        return Err(Error::domain(format!("embedding dimension {d} outside 1..={}", n.min(t))));
    }
    let centered = center_rows(z);
    let svd = svd(&centered)?;
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let mut coords = DMatrix::zeros(n, d);
    for (j, &src) in order.iter().take(d).enumerate() {
        let col = u.column(src);
        let sign = if col[pivot(col)] < 0.0 { -1.0 } else { 1.0 };
        coords.set_column(j, &(col * (sign * sv[src])));
    }
    Ok(Embedding {
        x: normalize_rows(coords)?,
        method: Method::Pca,
        spectrum: order.iter().take(d).map(|&j| sv[j]).collect(),
        warnings: Vec::new(),
    })
}

/// The standardized observed series, with no dimension reduction.
pub fn naive_embed(z: &DMatrix<f64>) -> Result<Embedding> {
    Ok(Embedding {
        x: standardize(z)?,
        method: Method::Naive,
        spectrum: Vec::new(),
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn magnitude_order() {
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -5.0, 1.0]));
        let e = sym_eig(&s).unwrap();
        assert_eq!(e.values, vec![-5.0, 3.0, 1.0]);
        assert_eq!(e.vectors.column(0)[1], 1.0);
    }

    #[test]
    fn tie_on_magnitude_prefers_positive() {
        let s = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = sym_eig(&s).unwrap();
        assert_abs_diff_eq!(e.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], -1.0, epsilon = 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(e.vectors[(0, 0)], h, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors[(1, 0)], h, epsilon = 1e-14);
        // (1,-1)/sqrt2 up to the pinned sign: first coordinate is the pivot.
        assert_abs_diff_eq!(e.vectors[(0, 1)], h, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors[(1, 1)], -h, epsilon = 1e-14);
    }

    #[test]
    fn rejects_asymmetric() {
        let s = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(sym_eig(&s), Err(Error::Domain(_))));
    }

    #[test]
    fn reconstruction_8x8() {
        let b = DMatrix::from_fn(8, 8, |i, j| ((i * 13 + j * 7) % 11) as f64 - 5.0);
        let s = &b + b.transpose();
        let e = sym_eig(&s).unwrap();
        let recon = &e.vectors * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(e.values.clone())) * e.vectors.transpose();
        assert!((recon - &s).amax() <= 1e-8);
        let gram = e.vectors.transpose() * &e.vectors;
        assert!((gram - DMatrix::identity(8, 8)).amax() <= 1e-10);
    }

    #[test]
    fn ase_small_cases() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let x = ase(&a, 1).unwrap().x;
        assert_abs_diff_eq!(x[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[(1, 0)], 1.0, epsilon = 1e-12);

        let a = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let x = ase(&a, 1).unwrap().x;
        assert_abs_diff_eq!(x[(0, 0)], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[(1, 0)], 0.0, epsilon = 1e-12);

        assert!(ase(&a, 3).is_err());
        assert!(ase(&a, 0).is_err());
    }

    #[test]
    fn ase_tie_warns() {
        let e = ase(&DMatrix::identity(3, 3), 1).unwrap();
        assert_eq!(e.warnings.len(), 1);
        assert!(ase(&DMatrix::identity(3, 3), 3).unwrap().warnings.is_empty());
    }

    #[test]
    fn pca_rows_unit_norm() {
        let z = DMatrix::from_fn(6, 9, |i, j| ((i * 5 + j * 3) % 7) as f64 + 0.1 * (i * j) as f64);
        let e = pca_embed(&z, 3).unwrap();
        for r in e.x.row_iter() {
            assert_abs_diff_eq!(r.norm(), 1.0, epsilon = 1e-10);
        }
        assert!(pca_embed(&z, 7).is_err());
    }

    #[test]
    fn naive_is_standardized() {
        let z = DMatrix::from_fn(4, 6, |i, j| (i as f64 + 1.0) * (j as f64).powi(2) - j as f64);
        let x = naive_embed(&z).unwrap().x;
        for r in x.row_iter() {
            assert_abs_diff_eq!(r.norm(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(r.sum(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn method_parse() {
        assert_eq!("pca".parse::<Method>().unwrap(), Method::Pca);
        assert!("lse".parse::<Method>().is_err());
    }
}
