// SPDX-License-Identifier: MIT OR Apache-2.0

//! MPULSE localisation of multiple change points in a reduced sequence.
//!
//! For every reduced coordinate `l` a moving-sum difference of two adjacent
//! windows of width `α` is formed, then smoothed by another moving average of
//! width `α`. The scan statistic
//!
//! ```text
//! S(i) = min_l (|D̃_l(i)| + c̃) / (|D̃_l(i + ⌊3α/2⌋)| + c̃)
//! ```
//!
//! dips towards zero `3α` observations ahead of each change. Runs where
//! `S < τ2` are located, the interior argmin of each run is taken and shifted
//! by `3α`.
//!
//! Scan positions, interval bounds and locations are one-based so they line
//! up with observation numbers: a location `z` means observation `z` is the
//! last one before the change.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ads::{fit_ads, fit_fpca, reduce, AdsModel, TrrParams};
use crate::basis::FunctionalSample;
use crate::error::{AdsError, Result};

/// What [`detect`] does when the dimension rule selects `q̂ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroDimension {
    /// Scan the leading eigen-direction anyway and let `τ2` decide.
    #[default]
    LeadingDirection,
    /// Report no change points.
    NoChange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpulseParams {
    pub alpha_n: usize,
    pub c_tilde: f64,
    pub tau2: f64,
    pub zero_dimension: ZeroDimension,
}

impl MpulseParams {
    pub const DEFAULT_TAU2: f64 = 0.5;

    pub fn new(alpha_n: usize, c_tilde: f64, tau2: f64) -> Result<Self> {
        let p = MpulseParams {
            alpha_n,
            c_tilde,
            tau2,
            zero_dimension: ZeroDimension::default(),
        };
        p.validate()?;
        Ok(p)
    }

    /// `α = ⌊n^0.6⌋`, `c̃ = 0.25 √(ln n / α)`, `τ2 = 0.5`.
    pub fn for_sample_size(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(AdsError::InsufficientData { needed: 2, got: n });
        }
        let alpha_n = default_window(n);
        MpulseParams::new(alpha_n, default_c_tilde(n, alpha_n), Self::DEFAULT_TAU2)
    }

    pub fn with_zero_dimension(mut self, policy: ZeroDimension) -> Self {
        self.zero_dimension = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_n == 0 {
            return Err(AdsError::domain("window alpha_n must be at least 1"));
        }
        if !(self.c_tilde > 0.0 && self.c_tilde.is_finite()) {
            return Err(AdsError::domain(format!("c_tilde must be positive, got {}", self.c_tilde)));
        }
        if !(self.tau2 > 0.0 && self.tau2 < 1.0) {
            return Err(AdsError::domain(format!("tau2 must lie in (0, 1), got {}", self.tau2)));
        }
        Ok(())
    }

    /// `⌊3α/2⌋`.
    pub fn lag(&self) -> usize {
        3 * self.alpha_n / 2
    }
}

/// `⌊n^0.6⌋`.
pub fn default_window(n: usize) -> usize {
    let w = (n as f64).powf(0.6).floor() as usize;
    w.max(1)
}

/// `0.25 √(ln n / α)`.
pub fn default_c_tilde(n: usize, alpha_n: usize) -> f64 {
    0.25 * ((n as f64).ln() / alpha_n as f64).sqrt()
}

/// Difference of adjacent window means: row `i` (position `i + 1`) holds
/// `mean(f[i..i+α]) − mean(f[i+α..i+2α])` per column.
pub fn mosum_diff(reduced: &DMatrix<f64>, alpha_n: usize) -> Result<DMatrix<f64>> {
    let (n, q) = reduced.shape();
    if alpha_n == 0 {
        return Err(AdsError::domain("window alpha_n must be at least 1"));
    }
    if n < 2 * alpha_n {
        return Err(AdsError::WindowTooLarge(format!(
            "{n} observations cannot hold two windows of {alpha_n}"
        )));
    }
    let rows = n - 2 * alpha_n + 1;
    let a = alpha_n as f64;
    let mut out = DMatrix::zeros(rows, q);
    for l in 0..q {
        let f = reduced.column(l);
        let mut left: f64 = (0..alpha_n).map(|j| f[j]).sum();
        let mut right: f64 = (alpha_n..2 * alpha_n).map(|j| f[j]).sum();
        out[(0, l)] = (left - right) / a;
        for i in 1..rows {
            left += f[i + alpha_n - 1] - f[i - 1];
            right += f[i + 2 * alpha_n - 1] - f[i + alpha_n - 1];
            out[(i, l)] = (left - right) / a;
        }
    }
    Ok(out)
}

/// Forward moving average of width `α` over the rows of `d`.
pub fn smooth_diff(d: &DMatrix<f64>, alpha_n: usize) -> Result<DMatrix<f64>> {
    let (len, q) = d.shape();
    if alpha_n == 0 {
        return Err(AdsError::domain("window alpha_n must be at least 1"));
    }
    if len < alpha_n {
        return Err(AdsError::WindowTooLarge(format!(
            "{len} difference positions cannot hold a window of {alpha_n}"
        )));
    }
    let rows = len - alpha_n + 1;
    let a = alpha_n as f64;
    let mut out = DMatrix::zeros(rows, q);
    for l in 0..q {
        let col = d.column(l);
        let mut acc: f64 = (0..alpha_n).map(|j| col[j]).sum();
        out[(0, l)] = acc / a;
        for i in 1..rows {
            acc += col[i + alpha_n - 1] - col[i - 1];
            out[(i, l)] = acc / a;
        }
    }
    Ok(out)
}

/// Ridge-ratio scan `S`, minimised over reduced coordinates.
pub fn pulse_statistic(tilde_d: &DMatrix<f64>, params: &MpulseParams) -> Result<Vec<f64>> {
    params.validate()?;
    let (len, q) = tilde_d.shape();
    if q == 0 {
        return Err(AdsError::EmptyReduction);
    }
    let lag = params.lag();
    if len <= lag {
        return Err(AdsError::WindowTooLarge(format!(
            "{len} smoothed positions leave no room for a lag of {lag}"
        )));
    }
    let c = params.c_tilde;
    let s = (0..len - lag)
        .map(|i| {
            (0..q)
                .map(|l| (tilde_d[(i, l)].abs() + c) / (tilde_d[(i + lag, l)].abs() + c))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(s)
}

/// Maximal runs of consecutive positions with `S < τ2`, as one-based `(m, M)`.
pub fn extract_intervals(s: &[f64], tau2: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &v) in s.iter().enumerate() {
        match (v < tau2, start) {
            (true, None) => start = Some(i),
            (false, Some(m)) => {
                out.push((m + 1, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(m) = start {
        out.push((m + 1, s.len()));
    }
    out
}

/// Interior argmin of `S` on each interval, shifted by `3α`.
///
/// Only positions strictly between `m` and `M` are searched, so runs shorter
/// than three positions yield no location. Ties go to the smallest position.
pub fn locate(s: &[f64], intervals: &[(usize, usize)], alpha_n: usize) -> Vec<usize> {
    intervals
        .iter()
        .filter_map(|&(m, big_m)| interior_argmin(s, m, big_m))
        .map(|i| i + 3 * alpha_n)
        .collect()
}

fn interior_argmin(s: &[f64], m: usize, big_m: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    // one-based positions m+1 ..= M-1 live at zero-based m ..= M-2
    for pos in (m + 1)..big_m {
        let v = s[pos - 1];
        if best.is_none_or(|b| v < s[b - 1]) {
            best = Some(pos);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpulseResult {
    /// Dimension chosen by the reduction rule.
    pub q_hat: usize,
    /// Number of reduced coordinates actually scanned.
    pub q_used: usize,
    /// `S` at positions `1..=len`.
    pub s_series: Vec<f64>,
    pub intervals: Vec<(usize, usize)>,
    pub locations: Vec<usize>,
    pub k_hat: usize,
}

impl MpulseResult {
    fn empty(q_hat: usize) -> Self {
        MpulseResult {
            q_hat,
            q_used: 0,
            s_series: Vec::new(),
            intervals: Vec::new(),
            locations: Vec::new(),
            k_hat: 0,
        }
    }
}

/// Checks that `n` observations leave a nonempty scan range for `params`.
pub fn check_scan_range(n: usize, params: &MpulseParams) -> Result<()> {
    let a = params.alpha_n;
    let needed = 3 * a + params.lag() - 1;
    if n < needed {
        return Err(AdsError::WindowTooLarge(format!(
            "window {a} needs at least {needed} observations, got {n}"
        )));
    }
    Ok(())
}

/// `(S, intervals, locations)` of one scan.
pub type Scan = (Vec<f64>, Vec<(usize, usize)>, Vec<usize>);

/// Runs the scan on an already reduced `n × q` sequence.
pub fn scan_reduced(reduced: &DMatrix<f64>, params: &MpulseParams) -> Result<Scan> {
    params.validate()?;
    check_scan_range(reduced.nrows(), params)?;
    let d = mosum_diff(reduced, params.alpha_n)?;
    let td = smooth_diff(&d, params.alpha_n)?;
    let s = pulse_statistic(&td, params)?;
    let intervals = extract_intervals(&s, params.tau2);
    let locations = locate(&s, &intervals, params.alpha_n);
    Ok((s, intervals, locations))
}

fn detect_with_model(sample: &FunctionalSample, model: &AdsModel, params: &MpulseParams) -> Result<MpulseResult> {
    let q_hat = model.q_hat();
    let reduced = match (q_hat, params.zero_dimension) {
        (0, ZeroDimension::NoChange) => return Ok(MpulseResult::empty(0)),
        (0, ZeroDimension::LeadingDirection) => reduce(sample, model.eigenvectors(), 1)?,
        _ => model.reduced().clone(),
    };
    let (s_series, intervals, locations) = scan_reduced(&reduced, params)?;
    Ok(MpulseResult {
        q_hat,
        q_used: reduced.ncols(),
        s_series,
        intervals,
        k_hat: locations.len(),
        locations,
    })
}

/// ADS reduction followed by the MPULSE scan.
pub fn detect(sample: &FunctionalSample, trr: TrrParams, params: &MpulseParams) -> Result<MpulseResult> {
    params.validate()?;
    check_scan_range(sample.len(), params)?;
    let model = fit_ads(sample, trr)?;
    detect_with_model(sample, &model, params)
}

/// FPCA reduction (keeping `share` of the variance) followed by the scan.
pub fn detect_fpca(sample: &FunctionalSample, share: f64, params: &MpulseParams) -> Result<MpulseResult> {
    params.validate()?;
    check_scan_range(sample.len(), params)?;
    let model = fit_fpca(sample, share)?;
    detect_with_model(sample, &model, params)
}
