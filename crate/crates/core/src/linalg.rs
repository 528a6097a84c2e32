// SPDX-License-Identifier: MIT OR Apache-2.0

//! Small dense symmetric eigen-helpers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{AdsError, Result};

/// Relative asymmetry tolerated by [`sym_eig`].
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigen-decomposition of a symmetric matrix, eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    pub values: DVector<f64>,
    /// Column `j` is the unit eigenvector for `values[j]`.
    pub vectors: DMatrix<f64>,
}

/// Decomposes a symmetric matrix.
///
/// Eigenvalues come out descending. Each eigenvector is oriented so that its
/// largest-magnitude entry is positive (first such entry on ties), which makes
/// downstream projections reproducible.
pub fn sym_eig(s: &DMatrix<f64>) -> Result<SymEigen> {
    if !s.is_square() {
        return Err(AdsError::domain(format!(
            "eigen-decomposition needs a square matrix, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(AdsError::domain("matrix has non-finite entries"));
    }
    let scale = s.amax().max(1.0);
    let n = s.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (s[(i, j)] - s[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(AdsError::domain(format!(
                    "matrix is not symmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }

    let eig = SymmetricEigen::new(s.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        orient(&mut col);
        vectors.set_column(dst, &col);
    }
    Ok(SymEigen { values, vectors })
}

fn orient(v: &mut DVector<f64>) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Inverse square root of a positive semi-definite matrix.
///
/// Eigenvalues below `floor_rel · λ_max` are raised to that floor before
/// inversion.
pub fn inv_sqrt_psd(q: &DMatrix<f64>, floor_rel: f64) -> Result<DMatrix<f64>> {
    if !(floor_rel > 0.0 && floor_rel < 1.0) {
        return Err(AdsError::domain(format!(
            "eigenvalue floor must lie in (0, 1), got {floor_rel}"
        )));
    }
    let eig = sym_eig(q)?;
    let top = eig.values[0];
    if top.is_nan() || top <= 0.0 {
        return Err(AdsError::DegenerateVariance(
            "difference covariance has no positive eigenvalue".into(),
        ));
    }
    let floor = floor_rel * top;
    let scaled: Vec<f64> = eig
        .values
        .iter()
        .map(|&l| 1.0 / l.max(floor).sqrt())
        .collect();
    let mut vs = eig.vectors.clone();
    for (k, mut col) in vs.column_iter_mut().enumerate() {
        col *= scaled[k];
    }
    let out = vs * eig.vectors.transpose();
    Ok((&out + out.transpose()) * 0.5)
}

/// `(A + Aᵀ) / 2`.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}
