// SPDX-License-Identifier: MIT OR Apache-2.0

//! Data-splitting test for the existence of mean change points.
//!
//! The sequence is split into odd- and even-indexed halves. The first half
//! picks the projection direction maximising the standardised quadratic form
//! `αᵀAα / αᵀQα`; the second half evaluates
//!
//! ```text
//! T_2n = √T · αᵀ A₂ α / αᵀ Q₂ α
//! ```
//!
//! which is asymptotically standard normal when there is no change.
//!
//! Both halves use `1/T` and `1/(2T)` prefactors with `T` the half size. Any
//! common prefactor cancels in the ratio.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::ads::covariance_parts;
use crate::basis::FunctionalSample;
use crate::error::{AdsError, Result};
use crate::linalg::{inv_sqrt_psd, sym_eig, symmetrize};

/// Relative eigenvalue floor used when whitening with `Q^{-1/2}`.
pub const PSD_FLOOR_REL: f64 = 1e-12;

const MIN_SPLIT_N: usize = 8;
const MIN_HALF: usize = 4;
const DENOMINATOR_FLOOR: f64 = 1e-300;

/// Odd/even halves of a sample. `first` holds observations 1, 3, 5, …
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub first: FunctionalSample,
    pub second: FunctionalSample,
}

impl SplitPair {
    /// Interleaves the halves back into the original order.
    pub fn interleave(&self) -> DMatrix<f64> {
        let (a, b) = (self.first.coeffs(), self.second.coeffs());
        let n = a.nrows() + b.nrows();
        DMatrix::from_fn(n, a.ncols(), |i, j| if i % 2 == 0 { a[(i / 2, j)] } else { b[(i / 2, j)] })
    }
}

pub fn split(sample: &FunctionalSample) -> Result<SplitPair> {
    let n = sample.len();
    if n < MIN_SPLIT_N {
        return Err(AdsError::InsufficientData {
            needed: MIN_SPLIT_N,
            got: n,
        });
    }
    let odd: Vec<usize> = (0..n).step_by(2).collect();
    let even: Vec<usize> = (1..n).step_by(2).collect();
    Ok(SplitPair {
        first: FunctionalSample::new(sample.select_rows(&odd), sample.basis())?,
        second: FunctionalSample::new(sample.select_rows(&even), sample.basis())?,
    })
}

/// `(A, Q)` for one half: `A` is the ADS target matrix of the half and `Q`
/// the half lag-one difference covariance, differences taken between
/// consecutive members of the half.
pub fn half_matrices(half: &FunctionalSample) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if half.len() < MIN_HALF {
        return Err(AdsError::InsufficientData {
            needed: MIN_HALF,
            got: half.len(),
        });
    }
    let (cov, q) = covariance_parts(half.coeffs());
    Ok((symmetrize(&(cov - &q)), q))
}

/// `α = Q^{-1/2} β` with `β` the top eigenvector of `Q^{-1/2} A Q^{-1/2}`.
///
/// The result is not normalised; [`t2n`] is invariant to its scale.
pub fn optimal_direction(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DVector<f64>> {
    if a.shape() != q.shape() {
        return Err(AdsError::domain("A and Q must have the same shape"));
    }
    let w = inv_sqrt_psd(q, PSD_FLOOR_REL)?;
    let whitened = symmetrize(&(&w * a * &w));
    let eig = sym_eig(&whitened)?;
    Ok(&w * eig.vectors.column(0))
}

/// `√T · αᵀAα / αᵀQα`.
pub fn t2n(direction: &DVector<f64>, a: &DMatrix<f64>, q: &DMatrix<f64>, t: usize) -> Result<f64> {
    if direction.len() != a.nrows() || a.shape() != q.shape() {
        return Err(AdsError::domain("direction, A and Q dimensions disagree"));
    }
    let num = direction.dot(&(a * direction));
    let den = direction.dot(&(q * direction));
    if den.is_nan() || den <= DENOMINATOR_FLOOR {
        return Err(AdsError::DegenerateVariance(format!(
            "projected difference variance {den:e} is not positive"
        )));
    }
    Ok((t as f64).sqrt() * num / den)
}

/// Outcome of [`ads_test`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub direction: Vec<f64>,
    pub p_value: f64,
    pub reject: bool,
    pub level: f64,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Two-sided normal p-value `2 (1 − Φ(|x|))`.
pub fn two_sided_p(statistic: f64) -> f64 {
    (2.0 * std_normal().sf(statistic.abs())).clamp(0.0, 1.0)
}

/// Upper `level/2` quantile of the standard normal.
pub fn critical_value(level: f64) -> f64 {
    std_normal().inverse_cdf(1.0 - level / 2.0)
}

/// Runs the split-sample test at significance `level`.
pub fn ads_test(sample: &FunctionalSample, level: f64) -> Result<TestResult> {
    if !(level > 0.0 && level < 1.0) {
        return Err(AdsError::domain(format!("level must lie in (0, 1), got {level}")));
    }
    let halves = split(sample)?;
    let (a1, q1) = half_matrices(&halves.first)?;
    let (a2, q2) = half_matrices(&halves.second)?;
    let direction = optimal_direction(&a1, &q1)?;
    let statistic = t2n(&direction, &a2, &q2, halves.second.len())?;
    Ok(TestResult {
        statistic,
        direction: direction.iter().copied().collect(),
        p_value: two_sided_p(statistic),
        reject: statistic.abs() > critical_value(level),
        level,
    })
}
