// SPDX-License-Identifier: MIT OR Apache-2.0

//! Adjacent deviation subspace (ADS) estimation.
//!
//! The target matrix is the centred covariance of the coefficient rows minus
//! half the covariance of lag-one differences:
//!
//! ```text
//! A_n = (1/n) Σ (C_i − C̄)(C_i − C̄)ᵀ − (1/2n) Σ_{i<n} (C_{i+1} − C_i)(C_{i+1} − C_i)ᵀ
//! ```
//!
//! Within a segment of constant mean both terms estimate the noise covariance,
//! so they cancel; what survives is spanned by the differences between
//! adjacent segment means. Projecting the data onto the leading eigenvectors
//! of `A_n` keeps every mean change point.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::FunctionalSample;
use crate::error::{AdsError, Result};
use crate::linalg::{sym_eig, symmetrize};

/// Centred covariance `(1/T) Σ (C_i − C̄)(C_i − C̄)ᵀ` and half lag-one
/// difference covariance `(1/2T) Σ (C_{i+1} − C_i)(C_{i+1} − C_i)ᵀ` of the
/// rows of `c`, where `T` is the row count.
pub(crate) fn covariance_parts(c: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let t = c.nrows();
    let mean = c.row_mean();
    let mut centred = c.clone();
    for mut row in centred.row_iter_mut() {
        row -= &mean;
    }
    let cov = centred.transpose() * &centred / t as f64;

    let diffs = c.rows(1, t - 1) - c.rows(0, t - 1);
    let half_diff = diffs.transpose() * &diffs / (2.0 * t as f64);
    (symmetrize(&cov), symmetrize(&half_diff))
}

fn require_rows(sample: &FunctionalSample, needed: usize) -> Result<()> {
    if sample.len() < needed {
        return Err(AdsError::InsufficientData {
            needed,
            got: sample.len(),
        });
    }
    Ok(())
}

/// The ADS target matrix `A_n` in coefficient space.
pub fn compute_an(sample: &FunctionalSample) -> Result<DMatrix<f64>> {
    require_rows(sample, 2)?;
    let (cov, half_diff) = covariance_parts(sample.coeffs());
    Ok(symmetrize(&(cov - half_diff)))
}

/// Plain centred covariance of the coefficients, the matrix behind FPCA.
pub fn fpca_matrix(sample: &FunctionalSample) -> Result<DMatrix<f64>> {
    require_rows(sample, 2)?;
    Ok(covariance_parts(sample.coeffs()).0)
}

/// Threshold and ridge of the thresholding ridge-ratio (TRR) rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrrParams {
    tau1: f64,
    ridge: f64,
}

impl TrrParams {
    pub const DEFAULT_TAU1: f64 = 0.5;

    pub fn new(tau1: f64, ridge: f64) -> Result<Self> {
        if !(tau1 > 0.0 && tau1 < 1.0) {
            return Err(AdsError::domain(format!("tau1 must lie in (0, 1), got {tau1}")));
        }
        if !(ridge > 0.0 && ridge.is_finite()) {
            return Err(AdsError::domain(format!("ridge c_n must be positive, got {ridge}")));
        }
        Ok(TrrParams { tau1, ridge })
    }

    /// Recommended tuning: `τ1 = 0.5`, `c_n = 0.5 · ln(ln n) / √n`.
    pub fn for_sample_size(n: usize) -> Result<Self> {
        TrrParams::new(Self::DEFAULT_TAU1, default_ridge(n)?)
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }
}

/// `0.5 · ln(ln n) / √n`; needs `n ≥ 3` so the ridge is positive.
pub fn default_ridge(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(AdsError::InsufficientData { needed: 3, got: n });
    }
    let nf = n as f64;
    Ok(0.5 * nf.ln().ln() / nf.sqrt())
}

/// Largest `k` with `(λ_{k+1} + c) / (λ_k + c) ≤ τ1`, or `0` when none qualifies.
///
/// Negative eigenvalues are treated as zero.
pub fn trr_dimension(eigenvalues: &[f64], params: TrrParams) -> Result<usize> {
    if eigenvalues.len() < 2 {
        return Err(AdsError::domain(format!(
            "TRR needs at least 2 eigenvalues, got {}",
            eigenvalues.len()
        )));
    }
    if eigenvalues.windows(2).any(|w| w[1] > w[0]) {
        return Err(AdsError::domain("eigenvalues must be sorted in descending order"));
    }
    let c = params.ridge;
    let floored: Vec<f64> = eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let q = floored
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[1] + c) / (w[0] + c) <= params.tau1)
        .map(|(k, _)| k + 1)
        .max()
        .unwrap_or(0);
    Ok(q)
}

/// Projects each row onto the first `q` eigenvector columns.
pub fn reduce(sample: &FunctionalSample, eigenvectors: &DMatrix<f64>, q: usize) -> Result<DMatrix<f64>> {
    if q == 0 {
        return Err(AdsError::EmptyReduction);
    }
    if eigenvectors.nrows() != sample.dim() || q > eigenvectors.ncols() {
        return Err(AdsError::domain(format!(
            "cannot take {q} directions from a {}x{} eigenvector matrix for {}-dimensional data",
            eigenvectors.nrows(),
            eigenvectors.ncols(),
            sample.dim()
        )));
    }
    Ok(sample.coeffs() * eigenvectors.columns(0, q))
}

/// Fitted reduction: eigenstructure, selected dimension and reduced data.
#[derive(Debug, Clone, PartialEq)]
pub struct AdsModel {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    q_hat: usize,
    reduced: DMatrix<f64>,
}

impl AdsModel {
    fn from_parts(sample: &FunctionalSample, eigenvalues: DVector<f64>, eigenvectors: DMatrix<f64>, q_hat: usize) -> Result<Self> {
        let reduced = if q_hat == 0 {
            DMatrix::zeros(sample.len(), 0)
        } else {
            reduce(sample, &eigenvectors, q_hat)?
        };
        Ok(AdsModel {
            eigenvalues,
            eigenvectors,
            q_hat,
            reduced,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn q_hat(&self) -> usize {
        self.q_hat
    }

    /// `n × q̂` reduced sequence; has zero columns when `q̂ = 0`.
    pub fn reduced(&self) -> &DMatrix<f64> {
        &self.reduced
    }

    /// False when the dimension rule found no change signal.
    pub fn has_signal(&self) -> bool {
        self.q_hat > 0
    }

    pub fn to_export(&self) -> AdsModelExport {
        AdsModelExport {
            eigenvalues: self.eigenvalues.iter().copied().collect(),
            q_hat: self.q_hat,
            eigenvectors: rows_of(&self.eigenvectors),
            reduced: rows_of(&self.reduced),
        }
    }
}

pub(crate) fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// JSON shape of an [`AdsModel`]; matrices are arrays of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdsModelExport {
    pub eigenvalues: Vec<f64>,
    pub q_hat: usize,
    pub eigenvectors: Vec<Vec<f64>>,
    pub reduced: Vec<Vec<f64>>,
}

/// `A_n` → eigen-decomposition → TRR → reduced data.
pub fn fit_ads(sample: &FunctionalSample, params: TrrParams) -> Result<AdsModel> {
    require_rows(sample, 4)?;
    let eig = sym_eig(&compute_an(sample)?)?;
    let q_hat = trr_dimension(eig.values.as_slice(), params)?;
    AdsModel::from_parts(sample, eig.values, eig.vectors, q_hat)
}

/// Smallest `k` whose leading eigenvalues carry `share` of the positive total.
pub fn fpca_dimension(eigenvalues: &[f64], share: f64) -> Result<usize> {
    if !(share > 0.0 && share <= 1.0) {
        return Err(AdsError::domain(format!("variance share must lie in (0, 1], got {share}")));
    }
    let total: f64 = eigenvalues.iter().map(|l| l.max(0.0)).sum();
    if total <= 0.0 {
        return Ok(0);
    }
    let mut acc = 0.0;
    for (k, l) in eigenvalues.iter().enumerate() {
        acc += l.max(0.0);
        if acc >= share * total {
            return Ok(k + 1);
        }
    }
    Ok(eigenvalues.len())
}

/// FPCA baseline reduction keeping `share` of the variance.
pub fn fit_fpca(sample: &FunctionalSample, share: f64) -> Result<AdsModel> {
    require_rows(sample, 4)?;
    let eig = sym_eig(&fpca_matrix(sample)?)?;
    let q = fpca_dimension(eig.values.as_slice(), share)?;
    AdsModel::from_parts(sample, eig.values, eig.vectors, q)
}
