// SPDX-License-Identifier: MIT OR Apache-2.0

//! Synthetic functional sequences and Monte-Carlo evaluation.
//!
//! Coefficient rows are `C_i = μ + ε_i` on even-numbered segments (the first
//! segment is number 0) and `C_i = ε_i` on odd ones, with
//! `μ = (u, …, u, 0, …, 0)` carrying `u` in its first `D_c` entries and
//! `ε_il = 2^{-l/2} Z_il` for one-based coordinate `l`. `Z` is standard normal
//! or raw Student-t with 4 degrees of freedom (variance 2, not rescaled).
//!
//! Randomness comes from ChaCha8 seeded with a 64-bit seed. Replication `r`
//! of a scenario uses `seed + r` (wrapping), so results do not depend on the
//! order in which replications run.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ads::TrrParams;
use crate::basis::{BasisSpec, FunctionalSample};
use crate::cptest::ads_test;
use crate::error::{AdsError, Result};
use crate::mpulse::{detect, detect_fpca, MpulseParams};

/// Variance share kept by the FPCA baseline reducer.
pub const FPCA_VARIANCE_SHARE: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    Gaussian,
    StudentT4,
}

impl fmt::Display for Noise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Noise::Gaussian => "gaussian",
            Noise::StudentT4 => "t4",
        })
    }
}

impl FromStr for Noise {
    type Err = AdsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" | "n" => Ok(Noise::Gaussian),
            "t4" | "student_t4" | "student-t4" => Ok(Noise::StudentT4),
            other => Err(AdsError::domain(format!("unknown noise law '{other}'"))),
        }
    }
}

/// Data-generating process for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub basis_dim: usize,
    /// Last index (one-based) of each segment but the final one.
    pub change_points: Vec<usize>,
    pub u: f64,
    /// Number of leading coordinates carrying the shift (`D_c`).
    pub support: usize,
    pub noise: Noise,
    pub seed: u64,
}

impl SimConfig {
    pub const DEFAULT_BASIS_DIM: usize = 21;

    pub fn new(n: usize, change_points: Vec<usize>, u: f64, support: usize, noise: Noise, seed: u64) -> Result<Self> {
        let cfg = SimConfig {
            n,
            basis_dim: Self::DEFAULT_BASIS_DIM,
            change_points,
            u,
            support,
            noise,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        BasisSpec::new(self.basis_dim)?;
        if self.n < 2 {
            return Err(AdsError::InsufficientData { needed: 2, got: self.n });
        }
        if !(1..=self.basis_dim).contains(&self.support) {
            return Err(AdsError::domain(format!(
                "shift support {} must lie in 1..={}",
                self.support, self.basis_dim
            )));
        }
        if !self.u.is_finite() {
            return Err(AdsError::domain("shift magnitude must be finite"));
        }
        GroundTruth::new(self.change_points.clone(), self.n)?;
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SimConfig { seed, ..self.clone() }
    }

    pub fn ground_truth(&self) -> GroundTruth {
        GroundTruth {
            change_points: self.change_points.clone(),
            n: self.n,
        }
    }
}

/// True change points of a sequence of length `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub change_points: Vec<usize>,
    pub n: usize,
}

impl GroundTruth {
    pub fn new(change_points: Vec<usize>, n: usize) -> Result<Self> {
        if change_points.iter().any(|&z| z == 0 || z >= n) {
            return Err(AdsError::domain(format!("change points must lie in 1..{n}")));
        }
        if change_points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AdsError::domain("change points must be strictly increasing"));
        }
        Ok(GroundTruth { change_points, n })
    }

    /// Segment label of every observation, `0` for the first segment.
    pub fn segmentation(&self) -> Vec<usize> {
        labels(&self.change_points, self.n)
    }
}

fn labels(points: &[usize], n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for i in 1..=n {
        out.push(seg);
        if seg < points.len() && points[seg] == i {
            seg += 1;
        }
    }
    out
}

/// Draws the coefficient sequence described by `config`.
pub fn gen_sequence(config: &SimConfig) -> Result<FunctionalSample> {
    config.validate()?;
    let d = config.basis_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scale: Vec<f64> = (1..=d).map(|l| 2f64.powf(-(l as f64) / 2.0)).collect();
    let seg = config.ground_truth().segmentation();

    let t4 = StudentT::new(4.0).expect("valid degrees of freedom");
    let mut coeffs = DMatrix::zeros(config.n, d);
    for i in 0..config.n {
        let shifted = seg[i].is_multiple_of(2);
        for l in 0..d {
            let z: f64 = match config.noise {
                Noise::Gaussian => StandardNormal.sample(&mut rng),
                Noise::StudentT4 => t4.sample(&mut rng),
            };
            let mean = if shifted && l < config.support { config.u } else { 0.0 };
            coeffs[(i, l)] = mean + scale[l] * z;
        }
    }
    FunctionalSample::new(coeffs, BasisSpec::new(d)?)
}

/// Pair-counting agreement between the segmentations induced by two change
/// point lists on `1..=n`. Estimated points outside `1..n` are ignored.
pub fn rand_index(truth: &[usize], estimate: &[usize], n: usize) -> f64 {
    if n < 2 {
        return 1.0;
    }
    let clean = |pts: &[usize]| {
        let mut v: Vec<usize> = pts.iter().copied().filter(|&z| z >= 1 && z < n).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let (a, b) = (clean(truth), clean(estimate));
    let (la, lb) = (labels(&a, n), labels(&b, n));
    let mut table = vec![vec![0u64; b.len() + 1]; a.len() + 1];
    for (x, y) in la.iter().zip(&lb) {
        table[*x][*y] += 1;
    }
    let pairs = |k: u64| k * k.saturating_sub(1) / 2;
    let both: u64 = table.iter().flatten().map(|&k| pairs(k)).sum();
    let same_a: u64 = table.iter().map(|r| pairs(r.iter().sum())).sum();
    let same_b: u64 = (0..=b.len()).map(|j| pairs(table.iter().map(|r| r[j]).sum())).sum();
    let total = pairs(n as u64);
    // agreements = pairs together in both + pairs apart in both
    let agree = total + 2 * both - same_a - same_b;
    agree as f64 / total as f64
}

/// Mean of `K̂` and its root-mean-square error against `true_k`.
pub fn khat_stats(estimates: &[usize], true_k: usize) -> Result<(f64, f64)> {
    if estimates.is_empty() {
        return Err(AdsError::domain("no estimates to summarise"));
    }
    let m = estimates.len() as f64;
    let mean = estimates.iter().map(|&k| k as f64).sum::<f64>() / m;
    let mse = estimates
        .iter()
        .map(|&k| (k as f64 - true_k as f64).powi(2))
        .sum::<f64>()
        / m;
    Ok((mean, mse.sqrt()))
}

/// Per-replication seeds `seed, seed + 1, …`.
fn replication_configs(config: &SimConfig, reps: usize) -> impl IndexedParallelIterator<Item = SimConfig> + '_ {
    (0..reps)
        .into_par_iter()
        .map(move |r| config.with_seed(config.seed.wrapping_add(r as u64)))
}

/// Statistic and decision of [`ads_test`] for each replication.
pub fn test_replications(config: &SimConfig, reps: usize, level: f64) -> Result<Vec<(f64, bool)>> {
    config.validate()?;
    replication_configs(config, reps)
        .map(|cfg| {
            let res = ads_test(&gen_sequence(&cfg)?, level)?;
            Ok((res.statistic, res.reject))
        })
        .collect()
}

/// Fraction of replications in which the test rejects at `level`.
pub fn empirical_rate(config: &SimConfig, reps: usize, level: f64) -> Result<f64> {
    if reps == 0 {
        return Err(AdsError::domain("need at least one replication"));
    }
    let out = test_replications(config, reps, level)?;
    Ok(out.iter().filter(|(_, r)| *r).count() as f64 / reps as f64)
}

/// Dimension reducer in front of the MPULSE scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reducer {
    Ads,
    /// Plain FPCA keeping [`FPCA_VARIANCE_SHARE`] of the variance.
    Fpca,
}

/// Per-replication estimates: `(K̂, Rand index)`.
pub fn estimation_replications(config: &SimConfig, reps: usize, reducer: Reducer) -> Result<Vec<(usize, f64)>> {
    config.validate()?;
    let trr = TrrParams::for_sample_size(config.n)?;
    let mp = MpulseParams::for_sample_size(config.n)?;
    replication_configs(config, reps)
        .map(|cfg| {
            let sample = gen_sequence(&cfg)?;
            let res = match reducer {
                Reducer::Ads => detect(&sample, trr, &mp)?,
                Reducer::Fpca => detect_fpca(&sample, FPCA_VARIANCE_SHARE, &mp)?,
            };
            Ok((res.k_hat, rand_index(&cfg.change_points, &res.locations, cfg.n)))
        })
        .collect()
}

/// Mean `K̂`, RMSE of `K̂` and mean Rand index over `reps` replications.
pub fn estimation_summary(config: &SimConfig, reps: usize, reducer: Reducer) -> Result<EstimationSummary> {
    if reps == 0 {
        return Err(AdsError::domain("need at least one replication"));
    }
    let out = estimation_replications(config, reps, reducer)?;
    let ks: Vec<usize> = out.iter().map(|(k, _)| *k).collect();
    let (k_mean, k_rmse) = khat_stats(&ks, config.change_points.len())?;
    let rand_index = out.iter().map(|(_, ri)| ri).sum::<f64>() / reps as f64;
    Ok(EstimationSummary {
        k_mean,
        k_rmse,
        rand_index,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationSummary {
    pub k_mean: f64,
    pub k_rmse: f64,
    pub rand_index: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Task {
    Test { level: f64 },
    Estimate { reducer: Reducer },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub table: u8,
    pub config: SimConfig,
    pub task: Task,
}

impl Scenario {
    pub fn method(&self) -> &'static str {
        match self.task {
            Task::Test { .. } => "T2n",
            Task::Estimate { reducer: Reducer::Ads } => "MPULSE-ADS",
            Task::Estimate { reducer: Reducer::Fpca } => "MPULSE-FPCA (approximate baseline)",
        }
    }
}

/// One line of a benchmark report. Test rows fill `rate`, estimation rows
/// the three `K̂`/RI columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub table: u8,
    pub noise: Noise,
    pub method: String,
    pub n: usize,
    pub k: usize,
    pub support: usize,
    pub u: f64,
    pub reps: usize,
    pub rate: Option<f64>,
    pub k_mean: Option<f64>,
    pub k_rmse: Option<f64>,
    pub rand_index: Option<f64>,
}

pub fn run_scenario(scenario: &Scenario, reps: usize) -> Result<ReportRow> {
    let cfg = &scenario.config;
    let mut row = ReportRow {
        table: scenario.table,
        noise: cfg.noise,
        method: scenario.method().to_string(),
        n: cfg.n,
        k: cfg.change_points.len(),
        support: cfg.support,
        u: cfg.u,
        reps,
        rate: None,
        k_mean: None,
        k_rmse: None,
        rand_index: None,
    };
    match scenario.task {
        Task::Test { level } => row.rate = Some(empirical_rate(cfg, reps, level)?),
        Task::Estimate { reducer } => {
            let s = estimation_summary(cfg, reps, reducer)?;
            row.k_mean = Some(s.k_mean);
            row.k_rmse = Some(s.k_rmse);
            row.rand_index = Some(s.rand_index);
        }
    }
    Ok(row)
}

pub fn run_scenario_grid(scenarios: &[Scenario], reps: usize) -> Result<Vec<ReportRow>> {
    scenarios.iter().map(|s| run_scenario(s, reps)).collect()
}

/// Shift settings of the testing tables: `(D_c, u)`.
pub const TEST_SHIFTS: [(usize, f64); 6] = [(10, 0.06), (10, 0.08), (10, 0.1), (20, 0.06), (20, 0.08), (20, 0.1)];
/// Shift settings of the estimation tables: `(D_c, u)`.
pub const ESTIMATION_SHIFTS: [(usize, f64); 4] = [(10, 0.08), (10, 0.1), (20, 0.08), (20, 0.1)];

/// Single-change design: `n = 200`, change after observation 100.
pub fn single_change_design() -> (usize, Vec<usize>) {
    (200, vec![100])
}

/// Two-change design: `n = 300`, changes after 100 and 200.
pub fn two_change_design() -> (usize, Vec<usize>) {
    (300, vec![100, 200])
}

/// Scenario grid of simulation table 1–4 (ADS rows, plus the FPCA baseline
/// for the estimation tables).
pub fn simulation_table(table: u8, seed: u64) -> Result<Vec<Scenario>> {
    let (n, cps) = match table {
        1 | 3 => single_change_design(),
        2 | 4 => two_change_design(),
        other => return Err(AdsError::domain(format!("no simulation table {other}; expected 1-4"))),
    };
    let mut out = Vec::new();
    for noise in [Noise::Gaussian, Noise::StudentT4] {
        if table <= 2 {
            let task = Task::Test { level: 0.05 };
            out.push(Scenario {
                table,
                config: SimConfig::new(n, cps.clone(), 0.0, 10, noise, seed)?,
                task,
            });
            for (support, u) in TEST_SHIFTS {
                out.push(Scenario {
                    table,
                    config: SimConfig::new(n, cps.clone(), u, support, noise, seed)?,
                    task,
                });
            }
        } else {
            for reducer in [Reducer::Ads, Reducer::Fpca] {
                for (support, u) in ESTIMATION_SHIFTS {
                    out.push(Scenario {
                        table,
                        config: SimConfig::new(n, cps.clone(), u, support, noise, seed)?,
                        task: Task::Estimate { reducer },
                    });
                }
            }
        }
    }
    Ok(out)
}
