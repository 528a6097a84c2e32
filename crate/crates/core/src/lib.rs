// SPDX-License-Identifier: MIT OR Apache-2.0

//! Change-point analysis for functional data through the adjacent deviation
//! subspace (ADS).
//!
//! Curves are carried as Fourier coefficient vectors ([`basis`]). The ADS
//! target matrix reduces them to a handful of coordinates that keep every
//! mean change ([`ads`]). On top of the reduction sit a split-sample test for
//! the existence of changes ([`cptest`]) and the MPULSE scan that locates them
//! ([`mpulse`]). [`simlab`] generates the standard synthetic designs and runs
//! seeded Monte-Carlo replications.
//!
//! ```
//! use ads_changepoint::prelude::*;
//!
//! let cfg = SimConfig::new(200, vec![100], 0.1, 20, Noise::Gaussian, 7)?;
//! let sample = gen_sequence(&cfg)?;
//!
//! let test = ads_test(&sample, 0.05)?;
//! assert!(test.reject);
//!
//! let found = detect(
//!     &sample,
//!     TrrParams::for_sample_size(200)?,
//!     &MpulseParams::for_sample_size(200)?,
//! )?;
//! assert!(found.locations.iter().any(|z| z.abs_diff(100) <= 10));
//! # Ok::<(), ads_changepoint::AdsError>(())
//! ```

#![forbid(unsafe_code)]

pub mod ads;
pub mod basis;
pub mod cptest;
pub mod error;
pub mod linalg;
pub mod mpulse;
pub mod simlab;

pub use error::{AdsError, Result};

pub mod prelude {
    pub use crate::ads::{compute_an, fit_ads, fit_fpca, fpca_matrix, reduce, trr_dimension, AdsModel, TrrParams};
    pub use crate::basis::{evaluate_basis, project, reconstruct, BasisSpec, FunctionalSample, TimeGrid};
    pub use crate::cptest::{ads_test, TestResult};
    pub use crate::error::{AdsError, Result};
    pub use crate::mpulse::{detect, MpulseParams, MpulseResult, ZeroDimension};
    pub use crate::simlab::{gen_sequence, rand_index, GroundTruth, Noise, SimConfig};
}

// Book chapters are compiled as doc-tests so their snippets stay in sync.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/basis.md")]
    mod basis {}
    #[doc = include_str!("../../../book/src/reduction.md")]
    mod reduction {}
    #[doc = include_str!("../../../book/src/dimension.md")]
    mod dimension {}
    #[doc = include_str!("../../../book/src/testing.md")]
    mod testing {}
    #[doc = include_str!("../../../book/src/mpulse.md")]
    mod mpulse {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
