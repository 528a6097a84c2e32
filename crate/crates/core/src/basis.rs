// SPDX-License-Identifier: MIT OR Apache-2.0

//! Fourier basis on `[0, 1]` and conversion between gridded curves and
//! basis coefficients.
//!
//! Basis functions are ordered `1, √2 cos(2πt), √2 sin(2πt), √2 cos(4πt), …`,
//! so for `D = 2K + 1` column `0` is the constant, column `2k - 1` the cosine
//! of frequency `k` and column `2k` the sine of frequency `k` (zero-based).

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;

use crate::error::{AdsError, Result};

/// Largest condition number accepted for a least-squares projection design.
pub const MAX_DESIGN_CONDITION: f64 = 1e12;

/// Strictly increasing observation times inside `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(AdsError::domain(format!(
                "time grid needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(bad) = points.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(AdsError::domain(format!(
                "time grid point {bad} lies outside [0, 1]"
            )));
        }
        if let Some(w) = points.windows(2).find(|w| w[1] <= w[0]) {
            return Err(AdsError::domain(format!(
                "time grid is not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(TimeGrid(points))
    }

    /// `m` equispaced points `0, 1/(m-1), …, 1`.
    pub fn uniform(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(AdsError::domain(format!(
                "time grid needs at least 2 points, got {m}"
            )));
        }
        let step = 1.0 / (m - 1) as f64;
        let mut pts: Vec<f64> = (0..m).map(|j| j as f64 * step).collect();
        pts[m - 1] = 1.0;
        Ok(TimeGrid(pts))
    }

    /// Maps arbitrary strictly increasing times (for example day numbers
    /// `1..=365`) affinely onto `[0, 1]`.
    pub fn rescaled(raw: &[f64]) -> Result<Self> {
        if raw.len() < 2 {
            return Err(AdsError::domain(format!(
                "time grid needs at least 2 points, got {}",
                raw.len()
            )));
        }
        if raw.iter().any(|t| !t.is_finite()) {
            return Err(AdsError::domain("time grid contains a non-finite value"));
        }
        let (lo, hi) = (raw[0], raw[raw.len() - 1]);
        if hi <= lo {
            return Err(AdsError::domain("time grid is not strictly increasing"));
        }
        let mut pts: Vec<f64> = raw.iter().map(|t| (t - lo) / (hi - lo)).collect();
        let last = pts.len() - 1;
        pts[last] = 1.0;
        TimeGrid::new(pts)
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Number of Fourier basis functions; always odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisSpec {
    dim: usize,
}

impl BasisSpec {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim.is_multiple_of(2) {
            return Err(AdsError::domain(format!(
                "Fourier basis size must be a positive odd integer, got {dim}"
            )));
        }
        Ok(BasisSpec { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Value of basis function `d` (zero-based) at time `t`.
    pub fn value(&self, d: usize, t: f64) -> f64 {
        if d == 0 {
            return 1.0;
        }
        let k = d.div_ceil(2) as f64;
        let arg = 2.0 * PI * k * t;
        if d % 2 == 1 {
            SQRT_2 * arg.cos()
        } else {
            SQRT_2 * arg.sin()
        }
    }
}

impl Default for BasisSpec {
    fn default() -> Self {
        BasisSpec { dim: 21 }
    }
}

/// `n` curves stored as rows of basis coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSample {
    coeffs: DMatrix<f64>,
    basis: BasisSpec,
}

impl FunctionalSample {
    pub fn new(coeffs: DMatrix<f64>, basis: BasisSpec) -> Result<Self> {
        if coeffs.ncols() != basis.dim() {
            return Err(AdsError::domain(format!(
                "coefficient matrix has {} columns but basis has {} functions",
                coeffs.ncols(),
                basis.dim()
            )));
        }
        if coeffs.nrows() < 2 {
            return Err(AdsError::InsufficientData {
                needed: 2,
                got: coeffs.nrows(),
            });
        }
        if let Some(i) = (0..coeffs.nrows()).find(|&i| coeffs.row(i).iter().any(|v| !v.is_finite())) {
            return Err(AdsError::domain(format!(
                "observation {} has a non-finite coefficient",
                i + 1
            )));
        }
        Ok(FunctionalSample { coeffs, basis })
    }

    /// Builds a sample from row vectors; the basis size is the row length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let basis = BasisSpec::new(dim)?;
        if let Some(i) = rows.iter().position(|r| r.len() != dim) {
            return Err(AdsError::domain(format!(
                "row {} has {} entries, expected {dim}",
                i + 1,
                rows[i].len()
            )));
        }
        let coeffs = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
        FunctionalSample::new(coeffs, basis)
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn basis(&self) -> BasisSpec {
        self.basis
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.coeffs.ncols()
    }

    /// Keeps rows whose indices are listed, in the given order.
    pub(crate) fn select_rows(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), self.dim(), |i, j| self.coeffs[(idx[i], j)])
    }
}

/// Evaluates the basis on `grid`: entry `(j, d)` is `φ_d(t_j)`.
pub fn evaluate_basis(spec: BasisSpec, grid: &TimeGrid) -> DMatrix<f64> {
    let pts = grid.points();
    DMatrix::from_fn(pts.len(), spec.dim(), |j, d| spec.value(d, pts[j]))
}

/// Least-squares projection of gridded curves (one per row of `values`) onto
/// the basis.
pub fn project(values: &DMatrix<f64>, spec: BasisSpec, grid: &TimeGrid) -> Result<FunctionalSample> {
    let m = grid.len();
    if values.ncols() != m {
        return Err(AdsError::domain(format!(
            "values have {} columns but the grid has {m} points",
            values.ncols()
        )));
    }
    if m < spec.dim() {
        return Err(AdsError::UnderDetermined {
            points: m,
            basis: spec.dim(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AdsError::domain("values contain a non-finite entry"));
    }

    let phi = evaluate_basis(spec, grid);
    let svd = phi.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_DESIGN_CONDITION {
        return Err(AdsError::IllConditioned {
            condition,
            limit: MAX_DESIGN_CONDITION,
        });
    }
    let u = svd.u.as_ref().expect("svd computed with u");
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
    // C = Y U Σ⁻¹ Vᵀ
    let mut u_scaled = u.clone();
    for (k, mut col) in u_scaled.column_iter_mut().enumerate() {
        col /= sv[k];
    }
    let coeffs = values * (u_scaled * v_t);
    FunctionalSample::new(coeffs, spec)
}

/// Evaluates each sample curve on `grid`.
pub fn reconstruct(sample: &FunctionalSample, grid: &TimeGrid) -> DMatrix<f64> {
    sample.coeffs() * evaluate_basis(sample.basis(), grid).transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid241() -> TimeGrid {
        TimeGrid::uniform(241).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![0.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.5, 0.5]).is_err());
        assert!(TimeGrid::new(vec![0.2, 0.1]).is_err());
        assert!(TimeGrid::new(vec![0.0, 1.2]).is_err());
        assert!(TimeGrid::new(vec![-0.1, 0.5]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.5, 1.0]).is_ok());
    }

    #[test]
    fn rescaled_day_numbers() {
        let days: Vec<f64> = (1..=366).map(f64::from).collect();
        let g = TimeGrid::rescaled(&days).unwrap();
        assert_eq!(g.len(), 366);
        assert_eq!(g.points()[0], 0.0);
        assert_eq!(g.points()[365], 1.0);
        assert!((g.points()[1] - 1.0 / 365.0).abs() < 1e-15);
    }

    #[test]
    fn basis_spec_rejects_even_and_zero() {
        assert!(BasisSpec::new(0).is_err());
        assert!(BasisSpec::new(4).is_err());
        assert!(BasisSpec::new(21).is_ok());
    }

    #[test]
    fn constant_basis_is_ones() {
        let g = TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
        let phi = evaluate_basis(BasisSpec::new(1).unwrap(), &g);
        assert_eq!(phi.shape(), (3, 1));
        assert!(phi.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn quarter_period_row() {
        let g = TimeGrid::new(vec![0.0, 0.25]).unwrap();
        let phi = evaluate_basis(BasisSpec::new(3).unwrap(), &g);
        assert_eq!(phi[(1, 0)], 1.0);
        assert!(phi[(1, 1)].abs() < 1e-15);
        assert!((phi[(1, 2)] - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn gram_near_identity_on_fine_grid() {
        let phi = evaluate_basis(BasisSpec::new(21).unwrap(), &grid241());
        let gram = phi.transpose() * &phi / 241.0;
        for i in 0..21 {
            for j in 0..21 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - target).abs() < 0.02, "({i},{j}) = {}", gram[(i, j)]);
            }
        }
    }

    #[test]
    fn project_constant_curve() {
        let vals = DMatrix::from_element(2, 241, 5.0);
        let s = project(&vals, BasisSpec::new(21).unwrap(), &grid241()).unwrap();
        assert!((s.coeffs()[(0, 0)] - 5.0).abs() < 1e-8);
        for d in 1..21 {
            assert!(s.coeffs()[(0, d)].abs() < 1e-8);
        }
    }

    #[test]
    fn project_sine_plus_cosine() {
        let g = grid241();
        let vals = DMatrix::from_fn(2, 241, |_, j| {
            let t = g.points()[j];
            SQRT_2 * (2.0 * PI * t).sin() + SQRT_2 * (4.0 * PI * t).cos()
        });
        let s = project(&vals, BasisSpec::new(21).unwrap(), &g).unwrap();
        // one-based positions 3 and 4 are zero-based 2 and 3
        for d in 0..21 {
            let want = if d == 2 || d == 3 { 1.0 } else { 0.0 };
            assert!((s.coeffs()[(0, d)] - want).abs() < 1e-8, "d={d}");
        }
    }

    #[test]
    fn project_errors() {
        let g = TimeGrid::uniform(5).unwrap();
        let vals = DMatrix::zeros(2, 5);
        assert!(matches!(
            project(&vals, BasisSpec::new(7).unwrap(), &g),
            Err(AdsError::UnderDetermined { points: 5, basis: 7 })
        ));
        // every grid point at a multiple of 1/2 makes sin(2πt) vanish
        let g = TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
        let vals = DMatrix::zeros(1, 3);
        assert!(matches!(
            project(&vals, BasisSpec::new(3).unwrap(), &g),
            Err(AdsError::IllConditioned { .. })
        ));
    }

    #[test]
    fn reconstruct_simple_cases() {
        let g = grid241();
        let spec = BasisSpec::new(21).unwrap();
        let zero = FunctionalSample::new(DMatrix::zeros(3, 21), spec).unwrap();
        assert!(reconstruct(&zero, &g).iter().all(|&v| v == 0.0));

        let mut c = DMatrix::zeros(2, 21);
        c[(0, 0)] = 1.0;
        c[(1, 0)] = 1.0;
        let one = FunctionalSample::new(c, spec).unwrap();
        assert!(reconstruct(&one, &g).iter().all(|&v| v == 1.0));
    }

    #[test]
    fn sample_rejects_non_finite_and_short() {
        let spec = BasisSpec::new(3).unwrap();
        assert!(FunctionalSample::new(DMatrix::zeros(1, 3), spec).is_err());
        let mut c = DMatrix::zeros(3, 3);
        c[(1, 2)] = f64::NAN;
        assert!(FunctionalSample::new(c, spec).is_err());
        assert!(FunctionalSample::new(DMatrix::zeros(3, 5), spec).is_err());
    }
}
