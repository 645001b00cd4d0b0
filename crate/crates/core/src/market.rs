//! Markets, portfolios and the quadratic structure of the covariance form.
//!
//! A market on `R^n` is a positive-semidefinite covariance form `r` together
//! with a cost covector `c` and an expected-payoff covector `p`. Portfolios
//! are coordinate vectors; `r(v, v)` is the variance of the payoff of `v`.

use nalgebra::{DMatrix, DVector};

use crate::error::{MarketError, Result};
use crate::linalg::{self, SortedEigen};
use crate::tolerance::ToleranceConfig;

/// Raw market data before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketSpec {
    pub r: DMatrix<f64>,
    pub c: DVector<f64>,
    pub p: DVector<f64>,
}

impl MarketSpec {
    pub fn new(r: DMatrix<f64>, c: DVector<f64>, p: DVector<f64>) -> Self {
        Self { r, c, p }
    }

    /// Builds a spec from row-major data. Rows of unequal length are reported
    /// as a dimension mismatch.
    pub fn from_rows(r: &[Vec<f64>], c: &[f64], p: &[f64]) -> Result<Self> {
        let n = r.len();
        let mut flat = Vec::with_capacity(n * n);
        for row in r {
            if row.len() != n {
                return Err(MarketError::DimensionMismatch { expected: n, got: row.len() });
            }
            flat.extend_from_slice(row);
        }
        Ok(Self {
            r: DMatrix::from_row_slice(n, n, &flat),
            c: DVector::from_column_slice(c),
            p: DVector::from_column_slice(p),
        })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn r_rows(&self) -> Vec<Vec<f64>> {
        self.r.row_iter().map(|row| row.iter().copied().collect()).collect()
    }
}

/// A validated market. The covariance form is stored symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct Market {
    spec: MarketSpec,
    tol: ToleranceConfig,
    lambda_max: f64,
}

/// A portfolio: quantities held of each of the `n` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio(pub DVector<f64>);

impl Portfolio {
    pub fn new(coords: DVector<f64>) -> Self {
        Self(coords)
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Self(DVector::from_column_slice(coords))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }
}

impl From<Vec<f64>> for Portfolio {
    fn from(v: Vec<f64>) -> Self {
        Self(DVector::from_vec(v))
    }
}

/// A linear subspace of portfolio space given by an orthonormal basis
/// (standard inner product), stored as the columns of an `n × dim` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    pub(crate) fn from_columns(basis: DMatrix<f64>) -> Self {
        Self { basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis_matrix(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn vectors(&self) -> Vec<DVector<f64>> {
        self.basis.column_iter().map(|c| c.clone_owned()).collect()
    }

    /// Distance from `v` to the subspace (standard norm).
    pub fn distance(&self, v: &DVector<f64>) -> f64 {
        let proj = &self.basis * (self.basis.transpose() * v);
        (v - proj).norm()
    }
}

impl Market {
    /// Checks the spec and returns a market carrying the symmetrized form.
    ///
    /// The PSD test runs on `(r + rᵀ)/2` before the asymmetry test, so a
    /// matrix that is indefinite once symmetrized is reported as such.
    pub fn validate(spec: MarketSpec, tol: ToleranceConfig) -> Result<Self> {
        let n = spec.r.nrows();
        if n == 0 {
            return Err(MarketError::EmptyMarket);
        }
        if spec.r.ncols() != n {
            return Err(MarketError::DimensionMismatch { expected: n, got: spec.r.ncols() });
        }
        for len in [spec.c.len(), spec.p.len()] {
            if len != n {
                return Err(MarketError::DimensionMismatch { expected: n, got: len });
            }
        }
        if spec.r.iter().any(|x| !x.is_finite()) {
            return Err(MarketError::NonFinite { field: "r" });
        }
        if spec.c.iter().any(|x| !x.is_finite()) {
            return Err(MarketError::NonFinite { field: "c" });
        }
        if spec.p.iter().any(|x| !x.is_finite()) {
            return Err(MarketError::NonFinite { field: "p" });
        }

        let sym = linalg::symmetrize(&spec.r);
        let eig = SortedEigen::new(&sym);
        let lambda_max = eig.max_value();
        let lambda_min = eig.min_value();
        if lambda_min < -tol.tol_psd * lambda_max.max(1.0) {
            return Err(MarketError::NotPositiveSemidefinite { min_eigenvalue: lambda_min });
        }

        let asymmetry = linalg::max_abs(&(&spec.r - spec.r.transpose()));
        if asymmetry > tol.tol_sym * linalg::max_abs(&spec.r).max(1.0) {
            return Err(MarketError::NotSymmetric { asymmetry });
        }

        Ok(Self {
            spec: MarketSpec { r: sym, ..spec },
            tol,
            lambda_max,
        })
    }

    pub fn new(spec: MarketSpec) -> Result<Self> {
        Self::validate(spec, ToleranceConfig::default())
    }

    /// Trusted constructor for forms that are PSD by construction.
    pub(crate) fn from_parts_unchecked(spec: MarketSpec, tol: ToleranceConfig) -> Self {
        let r = linalg::symmetrize(&spec.r);
        let lambda_max = SortedEigen::new(&r).max_value();
        Self { spec: MarketSpec { r, ..spec }, tol, lambda_max }
    }

    pub fn spec(&self) -> &MarketSpec {
        &self.spec
    }

    pub fn into_spec(self) -> MarketSpec {
        self.spec
    }

    pub fn tol(&self) -> &ToleranceConfig {
        &self.tol
    }

    pub fn with_tol(mut self, tol: ToleranceConfig) -> Self {
        self.tol = tol;
        self
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.spec.r
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.spec.c
    }

    pub fn p(&self) -> &DVector<f64> {
        &self.spec.p
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Eigenvalue cutoff below which a direction counts as riskless.
    pub fn rank_cutoff(&self) -> f64 {
        self.tol.tol_rank * self.lambda_max.max(1.0)
    }

    fn check_dim(&self, v: &Portfolio) -> Result<()> {
        if v.dim() != self.n() {
            return Err(MarketError::DimensionMismatch { expected: self.n(), got: v.dim() });
        }
        Ok(())
    }

    pub fn cost(&self, v: &Portfolio) -> Result<f64> {
        self.check_dim(v)?;
        Ok(self.spec.c.dot(&v.0))
    }

    pub fn payoff(&self, v: &Portfolio) -> Result<f64> {
        self.check_dim(v)?;
        Ok(self.spec.p.dot(&v.0))
    }

    /// `r(v, v)` without clamping.
    pub fn variance(&self, v: &Portfolio) -> Result<f64> {
        self.check_dim(v)?;
        Ok(v.0.dot(&(&self.spec.r * &v.0)))
    }

    /// Standard deviation `√r(v, v)`, with tolerance-level negatives clamped to 0.
    pub fn risk(&self, v: &Portfolio) -> Result<f64> {
        Ok(self.variance(v)?.max(0.0).sqrt())
    }

    pub fn covariance(&self, v: &Portfolio, w: &Portfolio) -> Result<f64> {
        self.check_dim(v)?;
        self.check_dim(w)?;
        Ok(v.0.dot(&(&self.spec.r * &w.0)))
    }

    /// Orthonormal basis of the risk-free portfolios, i.e. the kernel of `r`.
    pub fn riskless_subspace(&self) -> Subspace {
        let (kernel, _) = self.split_spectrum();
        Subspace::from_columns(kernel)
    }

    /// Eigenvectors of `r` split at the rank cutoff: `(kernel, risky)`, the
    /// risky columns in ascending eigenvalue order.
    pub(crate) fn split_spectrum(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let eig = SortedEigen::new(&self.spec.r);
        let cutoff = self.rank_cutoff();
        let d = eig.values.iter().filter(|&&l| l <= cutoff).count();
        let n = self.n();
        (
            eig.vectors.columns(0, d).clone_owned(),
            eig.vectors.columns(d, n - d).clone_owned(),
        )
    }

    pub fn rank(&self) -> usize {
        self.n() - self.riskless_subspace().dim()
    }

    /// The market on the codomain of `t` that makes `t` a Markowitz isomorphism:
    /// `r' = t⁻ᵀ r t⁻¹`, `c' = c ∘ t⁻¹`, `p' = p ∘ t⁻¹`.
    pub fn pushforward(&self, t: &DMatrix<f64>) -> Result<Market> {
        let n = self.n();
        if t.shape() != (n, n) {
            return Err(MarketError::DimensionMismatch { expected: n, got: t.nrows() });
        }
        if !linalg::columns_independent(t, self.tol.tol_rank) {
            return Err(MarketError::SingularTransform);
        }
        let inv = t.clone().try_inverse().ok_or(MarketError::SingularTransform)?;
        Ok(self.pushforward_by_inverse(&inv))
    }

    /// Pushforward given `t⁻¹` directly, i.e. the market expressed in the basis
    /// formed by the columns of `basis`.
    pub(crate) fn pushforward_by_inverse(&self, basis: &DMatrix<f64>) -> Market {
        let r = basis.transpose() * &self.spec.r * basis;
        let c = basis.transpose() * &self.spec.c;
        let p = basis.transpose() * &self.spec.p;
        Market::from_parts_unchecked(MarketSpec::new(r, c, p), self.tol)
    }
}

/// Whether `t` (an `n₂ × n₁` matrix) preserves risk, cost and payoff from `m1`
/// to `m2`.
///
/// The check runs on the standard basis vectors and their pairwise sums;
/// by linearity and polarization that determines the bilinear form.
pub fn is_morphism(m1: &Market, m2: &Market, t: &DMatrix<f64>) -> Result<bool> {
    let (n1, n2) = (m1.n(), m2.n());
    if t.ncols() != n1 {
        return Err(MarketError::DimensionMismatch { expected: n1, got: t.ncols() });
    }
    if t.nrows() != n2 {
        return Err(MarketError::DimensionMismatch { expected: n2, got: t.nrows() });
    }
    let mut probes: Vec<DVector<f64>> = (0..n1)
        .map(|a| {
            let mut e = DVector::zeros(n1);
            e[a] = 1.0;
            e
        })
        .collect();
    for a in 0..n1 {
        for b in a + 1..n1 {
            let mut e = DVector::zeros(n1);
            e[a] = 1.0;
            e[b] = 1.0;
            probes.push(e);
        }
    }

    let mut worst = 0.0f64;
    let mut scale = 1.0f64;
    for v in probes {
        let tv = t * &v;
        let pairs = [
            (tv.dot(&(m2.r() * &tv)), v.dot(&(m1.r() * &v))),
            (m2.p().dot(&tv), m1.p().dot(&v)),
            (m2.c().dot(&tv), m1.c().dot(&v)),
        ];
        for (lhs, rhs) in pairs {
            worst = worst.max((lhs - rhs).abs());
            scale = scale.max(lhs.abs()).max(rhs.abs());
        }
    }
    Ok(worst <= m1.tol.tol_match * scale)
}
