// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors raised by the reduction, testing and localisation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdsError {
    /// An input violated a documented precondition (bad grid, wrong shape,
    /// non-symmetric matrix, out-of-range parameter, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("under-determined projection: {points} grid points for {basis} basis functions")]
    UnderDetermined { points: usize, basis: usize },

    #[error("ill-conditioned design: condition number {condition:.3e} exceeds {limit:.0e}")]
    IllConditioned { condition: f64, limit: f64 },

    /// A variance estimate collapsed to zero, so a standardised statistic
    /// cannot be formed.
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("window too large: {0}")]
    WindowTooLarge(String),

    /// The selected structural dimension is zero; there is nothing to project on.
    #[error("empty reduction: selected dimension is zero")]
    EmptyReduction,
}

impl AdsError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        AdsError::Domain(msg.into())
    }

    /// True for failures caused by degenerate statistics rather than bad data.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, AdsError::DegenerateVariance(_))
    }
}

pub type Result<T> = std::result::Result<T, AdsError>;
