//! Classification of arbitrage-free markets up to Markowitz isomorphism.
//!
//! Every arbitrage-free market on `R^n` is isomorphic to exactly one model
//! market in which `r = diag(1_k, 0)` and `c`, `p` take one of three shapes:
//!
//! | case               | `c`                 | `p`                        |
//! |--------------------|---------------------|----------------------------|
//! | `RisklessWithCost` | `(0, …, 0, 1)`      | `(g, 0, …, 0, i)`          |
//! | `NoCostlyRiskless` | `(1/m, 0, …, 0)`    | `(i/m, g, 0, …, 0)`        |
//! | `ZeroCost`         | `0`                 | `(g, 0, …, 0)`             |
//!
//! [`canonicalize`] builds the change of basis into that model by
//! Gram-Schmidt under `r`, and [`invariants_dual`] recovers `(m, g, i)`
//! independently from the inverse of `r + c ⊗ c`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};
use crate::linalg::{self, SortedEigen};
use crate::market::{Market, MarketSpec, Portfolio};
use crate::optimize;
use crate::tolerance::{rel_close, rel_diff, ToleranceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CanonicalCase {
    /// `c ≠ 0` and some riskless portfolio has nonzero cost (`m = 0`).
    RisklessWithCost,
    /// `c ≠ 0` and every riskless portfolio is costless (`m > 0`).
    NoCostlyRiskless,
    /// `c = 0`.
    ZeroCost,
}

impl CanonicalCase {
    pub fn as_str(self) -> &'static str {
        match self {
            CanonicalCase::RisklessWithCost => "RisklessWithCost",
            CanonicalCase::NoCostlyRiskless => "NoCostlyRiskless",
            CanonicalCase::ZeroCost => "ZeroCost",
        }
    }
}

impl std::fmt::Display for CanonicalCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The isomorphism invariants `(k, m, g, i)` of an arbitrage-free market.
///
/// `m` and `i` are `None` for zero-cost markets. When `k = 1` in the
/// `NoCostlyRiskless` case the model does not depend on `g`; it is stored as
/// `0` with `g_defined = false`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub case: CanonicalCase,
    pub n: usize,
    pub k: usize,
    pub m: Option<f64>,
    pub g: f64,
    pub g_defined: bool,
    pub i: Option<f64>,
}

impl Invariants {
    /// Checks the parameters against the excluded set and normalizes the
    /// `k = 1` bookkeeping.
    pub fn new(case: CanonicalCase, n: usize, k: usize, m: f64, g: f64, i: f64) -> Result<Self> {
        let bad = |msg: &str| Err(MarketError::InvalidArgument(msg.to_string()));
        if n == 0 {
            return Err(MarketError::EmptyMarket);
        }
        if k > n {
            return bad("k exceeds n");
        }
        if !(g.is_finite() && g >= 0.0) {
            return bad("g must be finite and non-negative");
        }
        match case {
            CanonicalCase::RisklessWithCost => {
                if m != 0.0 {
                    return bad("RisklessWithCost requires m = 0");
                }
                if k == n {
                    return bad("(k = n, m = 0) is excluded");
                }
                if k == 0 && g != 0.0 {
                    return bad("g must be 0 when k = 0");
                }
                if !i.is_finite() {
                    return bad("i must be finite");
                }
                Ok(Self { case, n, k, m: Some(0.0), g, g_defined: true, i: Some(i) })
            }
            CanonicalCase::NoCostlyRiskless => {
                if !(m.is_finite() && m > 0.0) {
                    return bad("NoCostlyRiskless requires finite m > 0");
                }
                if k == 0 {
                    return bad("(k = 0, m ≠ 0) is excluded");
                }
                if !i.is_finite() {
                    return bad("i must be finite");
                }
                let (g, g_defined) = if k == 1 { (0.0, false) } else { (g, true) };
                Ok(Self { case, n, k, m: Some(m), g, g_defined, i: Some(i) })
            }
            CanonicalCase::ZeroCost => {
                if k == 0 && g != 0.0 {
                    return bad("g must be 0 when k = 0");
                }
                Ok(Self { case, n, k, m: None, g, g_defined: true, i: None })
            }
        }
    }

    /// The model market of this isomorphism class.
    pub fn model_spec(&self) -> MarketSpec {
        let n = self.n;
        let mut r = DMatrix::zeros(n, n);
        for j in 0..self.k {
            r[(j, j)] = 1.0;
        }
        let mut c = DVector::zeros(n);
        let mut p = DVector::zeros(n);
        match self.case {
            CanonicalCase::RisklessWithCost => {
                c[n - 1] = 1.0;
                p[n - 1] = self.i.unwrap_or(0.0);
                if self.k > 0 {
                    p[0] = self.g;
                }
            }
            CanonicalCase::NoCostlyRiskless => {
                let m = self.m.unwrap_or(1.0);
                c[0] = 1.0 / m;
                p[0] = self.i.unwrap_or(0.0) / m;
                if self.k >= 2 {
                    p[1] = self.g;
                }
            }
            CanonicalCase::ZeroCost => {
                if self.k > 0 {
                    p[0] = self.g;
                }
            }
        }
        MarketSpec::new(r, c, p)
    }

    pub fn model(&self, tol: ToleranceConfig) -> Market {
        Market::from_parts_unchecked(self.model_spec(), tol)
    }
}

/// Canonical form of a market: its invariants plus the witnessing change of
/// basis.
///
/// `transform` maps original coordinates to canonical ones, so pushing the
/// market forward along it reproduces the model. `basis` is its inverse: its
/// columns are the canonical basis vectors written in original coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub invariants: Invariants,
    pub transform: DMatrix<f64>,
    pub basis: DMatrix<f64>,
    pub residual: f64,
}

impl CanonicalForm {
    pub fn case(&self) -> CanonicalCase {
        self.invariants.case
    }

    pub fn k(&self) -> usize {
        self.invariants.k
    }

    pub fn m(&self) -> Option<f64> {
        self.invariants.m
    }

    pub fn g(&self) -> f64 {
        self.invariants.g
    }

    pub fn i(&self) -> Option<f64> {
        self.invariants.i
    }

    pub fn g_defined(&self) -> bool {
        self.invariants.g_defined
    }

    /// The `j`-th canonical basis vector in original coordinates.
    pub fn basis_vector(&self, j: usize) -> Portfolio {
        Portfolio::new(self.basis.column(j).clone_owned())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    pub arbitrage: Option<Portfolio>,
    pub has_valueless: bool,
    pub valueless_basis: Vec<DVector<f64>>,
    pub cp_independent: bool,
    pub nondegenerate: bool,
}

/// Invariants recovered from the dual of `r̂ = r + c ⊗ c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualInvariants {
    pub m: f64,
    pub g: f64,
    pub i: f64,
    pub rhat_cc: f64,
    pub rhat_pc: f64,
    pub rhat_pp: f64,
}

impl DualInvariants {
    /// Inverts the pairing formulas `r̂*(c,c) = 1/(1+m²)`,
    /// `r̂*(p,c) = i/(1+m²)`, `r̂*(p,p) = i²/(1+m²) + g²`.
    pub fn from_pairings(rhat_cc: f64, rhat_pc: f64, rhat_pp: f64) -> Self {
        let m = (1.0 / rhat_cc - 1.0).max(0.0).sqrt();
        let i = rhat_pc / rhat_cc;
        let g = (rhat_pp - rhat_pc * rhat_pc / rhat_cc).max(0.0).sqrt();
        Self { m, g, i, rhat_cc, rhat_pc, rhat_pp }
    }
}

/// Per-invariant comparison of two markets.
#[derive(Debug, Clone, PartialEq)]
pub struct IsomorphismReport {
    pub isomorphic: bool,
    pub same_dimension: bool,
    pub same_case: bool,
    pub same_k: bool,
    /// Relative deltas (`|a-b| / max(1,|a|,|b|)`); `None` when the invariant
    /// is undefined on either side or not compared.
    pub delta_m: Option<f64>,
    pub delta_g: Option<f64>,
    pub delta_i: Option<f64>,
    pub left: Invariants,
    pub right: Invariants,
}

/// `‖basisᵀ f‖ ≤ tol · ‖f‖` for an orthonormal basis.
fn vanishes_on(f: &DVector<f64>, basis: &DMatrix<f64>, tol: f64) -> bool {
    (basis.transpose() * f).norm() <= tol * f.norm()
}

/// Orthonormal basis of the costless risk-free portfolios `V⁰ ∩ ker c`.
fn costless_riskless(market: &Market, riskless: &DMatrix<f64>) -> DMatrix<f64> {
    let tol = market.tol().tol_match;
    if riskless.ncols() == 0 || vanishes_on(market.c(), riskless, tol) {
        return riskless.clone();
    }
    let cz = riskless.transpose() * market.c();
    riskless * linalg::complement_of(&cz)
}

/// Splits `V⁰ ∩ ker c` by `p`: returns the direction of steepest payoff when
/// `p` does not vanish there, and the valueless remainder.
fn split_by_payoff(market: &Market, w: &DMatrix<f64>) -> (Option<DVector<f64>>, DMatrix<f64>) {
    if w.ncols() == 0 || vanishes_on(market.p(), w, market.tol().tol_match) {
        return (None, w.clone());
    }
    let pw = w.transpose() * market.p();
    let witness = w * &pw / pw.norm_squared();
    (Some(witness), w * linalg::complement_of(&pw))
}

/// A portfolio with zero risk, zero cost and payoff 1, if one exists.
pub fn find_arbitrage(market: &Market) -> Option<Portfolio> {
    let v0 = market.riskless_subspace();
    let w = costless_riskless(market, v0.basis_matrix());
    split_by_payoff(market, &w).0.map(Portfolio::new)
}

pub fn degeneracy_report(market: &Market) -> DegeneracyReport {
    let v0 = market.riskless_subspace();
    let w = costless_riskless(market, v0.basis_matrix());
    let (witness, valueless) = split_by_payoff(market, &w);
    let valueless_basis: Vec<DVector<f64>> =
        valueless.column_iter().map(|c| c.clone_owned()).collect();

    let mut stack = DMatrix::zeros(market.n(), 2);
    stack.set_column(0, market.c());
    stack.set_column(1, market.p());
    let cp_independent = linalg::columns_independent(&stack, market.tol().tol_rank);

    let has_valueless = !valueless_basis.is_empty();
    DegeneracyReport {
        nondegenerate: witness.is_none() && !has_valueless && cp_independent,
        arbitrage: witness.map(Portfolio::new),
        has_valueless,
        valueless_basis,
        cp_independent,
    }
}

/// Canonical form of an arbitrage-free market.
///
/// Follows the constructive classification: pick the riskless subspace from
/// the spectrum of `r`, Gram-Schmidt a risky complement under `r`, then
/// rotate that orthonormal block with Householder reflections so the duals of
/// `c` and `p` line up with the first one or two basis vectors.
pub fn canonicalize(market: &Market) -> Result<CanonicalForm> {
    if find_arbitrage(market).is_some() {
        return Err(MarketError::ArbitrageMarket);
    }
    let tol = *market.tol();
    let n = market.n();
    let (c, p) = (market.c(), market.p());
    let (kernel, risky) = market.split_spectrum();
    let d = kernel.ncols();
    let k = n - d;

    let c_norm = c.norm();
    let zero_cost = c_norm <= tol.tol_rank * 1f64.max(p.norm()).max(c_norm);
    let pivot = tol.tol_rank;
    let tie = |v: &DVector<f64>, f: &DMatrix<f64>| {
        64.0 * f64::EPSILON * 1f64.max(v.norm() * f.column_iter().fold(0.0f64, |a, col| a.max(col.norm())))
    };
    // A payoff slope at rounding level is reported as exactly zero.
    let snap = |g: f64, f: &DMatrix<f64>| {
        if g <= tol.tol_canon / (64.0 * f64::EPSILON) * tie(p, f) {
            0.0
        } else {
            g
        }
    };

    let (invariants, basis) = if zero_cost {
        let f = linalg::gram_schmidt_form(market.r(), &risky, pivot)?;
        let a = f.transpose() * p;
        let h = linalg::align_to_first_axis(&a, tie(p, &f));
        let e = &f * &h;
        let g = if k > 0 { p.dot(&e.column(0)).max(0.0) } else { 0.0 };
        let inv = Invariants::new(CanonicalCase::ZeroCost, n, k, 0.0, g, 0.0)?;
        (inv, hstack(&[&e, &kernel]))
    } else if d > 0 && !vanishes_on(c, &kernel, tol.tol_match) {
        // Riskless portfolio with nonzero cost: e_n = v_R / c(v_R).
        let cz = kernel.transpose() * c;
        let v_r = &kernel * &cz;
        let e_n = &v_r / c.dot(&v_r);
        let costless_riskless = &kernel * linalg::complement_of(&cz);
        // Shift risky eigenvectors into ker c along e_n; r is unchanged.
        let shifted = &risky - &e_n * (c.transpose() * &risky);
        let f = linalg::gram_schmidt_form(market.r(), &shifted, pivot)?;
        let a = f.transpose() * p;
        let h = linalg::align_to_first_axis(&a, tie(p, &f));
        let e = &f * &h;
        let g = if k > 0 { snap(p.dot(&e.column(0)).max(0.0), &f) } else { 0.0 };
        let i = p.dot(&e_n);
        let inv = Invariants::new(CanonicalCase::RisklessWithCost, n, k, 0.0, g, i)?;
        let e_n = DMatrix::from_column_slice(n, 1, e_n.as_slice());
        (inv, hstack(&[&e, &costless_riskless, &e_n]))
    } else {
        if k == 0 {
            return Err(MarketError::IllConditioned(
                "nonzero cost functional vanishes on every risky direction".into(),
            ));
        }
        let f = linalg::gram_schmidt_form(market.r(), &risky, pivot)?;
        let ac = f.transpose() * c;
        let cost_scale = ac.norm();
        if cost_scale <= tie(c, &f) {
            return Err(MarketError::IllConditioned(
                "cost functional vanishes on the risky block".into(),
            ));
        }
        let e1 = &f * linalg::align_to_first_axis(&ac, 0.0);
        let m = 1.0 / c.dot(&e1.column(0));
        let b = e1.transpose() * p;
        let i = b[0] * m;
        let (e, g) = if k >= 2 {
            let tail = b.rows(1, k - 1).clone_owned();
            let h2 = linalg::align_to_first_axis(&tail, tie(p, &f));
            let mut block = DMatrix::identity(k, k);
            block.view_mut((1, 1), (k - 1, k - 1)).copy_from(&h2);
            let e = &e1 * block;
            let g = snap(p.dot(&e.column(1)).max(0.0), &f);
            (e, g)
        } else {
            (e1, 0.0)
        };
        let inv = Invariants::new(CanonicalCase::NoCostlyRiskless, n, k, m, g, i)?;
        (inv, hstack(&[&e, &kernel]))
    };

    let transform = basis
        .clone()
        .try_inverse()
        .ok_or_else(|| MarketError::IllConditioned("canonical basis is singular".into()))?;
    let pushed = market.pushforward_by_inverse(&basis);
    let model = invariants.model_spec();
    let residual = linalg::max_abs(&(pushed.r() - &model.r))
        .max(linalg::max_abs_vec(&(pushed.c() - &model.c)))
        .max(linalg::max_abs_vec(&(pushed.p() - &model.p)));
    let scale = 1f64
        .max(market.lambda_max())
        .max(linalg::max_abs_vec(c))
        .max(linalg::max_abs_vec(p));
    if !(residual <= tol.tol_canon * scale) {
        return Err(MarketError::IllConditioned(format!(
            "canonical residual {residual:e} exceeds tolerance"
        )));
    }
    Ok(CanonicalForm { invariants, transform, basis, residual })
}

fn hstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

/// `(m, g, i)` from the dual pairings of `r̂ = r + c ⊗ c`.
pub fn invariants_dual(market: &Market) -> Result<DualInvariants> {
    let report = degeneracy_report(market);
    if !report.nondegenerate {
        return Err(MarketError::DegenerateMarket(
            "dual invariants are defined for nondegenerate markets only".into(),
        ));
    }
    let c = market.c();
    // Drop the spectrum below the rank cutoff so both routes agree on `k`,
    // and evaluate `r` through its risky eigenpairs so the kernel contributes
    // exactly nothing.
    let spectrum = SortedEigen::new(market.r());
    let cutoff = market.rank_cutoff();
    let d = spectrum.values.iter().filter(|&&l| l <= cutoff).count();
    let risky = spectrum.vectors.columns(d, market.n() - d).clone_owned();
    let lambda = spectrum.values.rows(d, market.n() - d).clone_owned();
    let r = &risky * DMatrix::from_diagonal(&lambda) * risky.transpose();
    let quad = |x: &DVector<f64>| {
        let y = risky.transpose() * x;
        y.iter().zip(lambda.iter()).map(|(a, l)| l * a * a).sum::<f64>()
    };
    let rhat = &r + c * c.transpose();
    let eig = SortedEigen::new(&rhat);
    if !(eig.min_value() > market.tol().tol_rank * eig.max_value()) {
        return Err(MarketError::DegenerateMarket("r + c⊗c is singular".into()));
    }
    let chol = rhat
        .cholesky()
        .ok_or_else(|| MarketError::DegenerateMarket("r + c⊗c is not positive definite".into()))?;
    let p = market.p();
    let c_dual = chol.solve(c);
    let p_dual = chol.solve(p);
    let (rhat_cc, rhat_pc, rhat_pp) = (c.dot(&c_dual), p.dot(&c_dual), p.dot(&p_dual));
    // Same quantities as `from_pairings` without the cancellation in
    // `1/r̂*(c,c) − 1` and `r̂*(p,p) − r̂*(p,c)²/r̂*(c,c)`: with `x = r̂⁻¹c`,
    // `m² = r(x,x) / c(x)²`, and with `u = r̂⁻¹(p − i c)`, `g² = r(u,u)`.
    let i = rhat_pc / rhat_cc;
    let m = quad(&c_dual).sqrt() / rhat_cc;
    let u = chol.solve(&(p - c * i));
    let g = quad(&u).sqrt();
    Ok(DualInvariants { m, g, i, rhat_cc, rhat_pc, rhat_pp })
}

/// Compares the invariants of two markets; `tol_iso` is relative.
pub fn isomorphism_report(m1: &Market, m2: &Market, tol_iso: f64) -> Result<IsomorphismReport> {
    let a = canonicalize(m1)?.invariants;
    let b = canonicalize(m2)?.invariants;
    Ok(compare_invariants(&a, &b, tol_iso))
}

pub fn compare_invariants(a: &Invariants, b: &Invariants, tol_iso: f64) -> IsomorphismReport {
    let same_dimension = a.n == b.n;
    let same_case = a.case == b.case;
    let same_k = a.k == b.k;
    let pair = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => Some(rel_diff(x, y)),
        _ => None,
    };
    let delta_m = pair(a.m, b.m);
    let delta_i = pair(a.i, b.i);
    let delta_g = (a.g_defined && b.g_defined).then(|| rel_diff(a.g, b.g));
    let close = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => rel_close(x, y, tol_iso),
        (None, None) => true,
        _ => false,
    };
    let g_ok = !(a.g_defined && b.g_defined) || rel_close(a.g, b.g, tol_iso);
    let isomorphic = same_dimension
        && same_case
        && same_k
        && close(a.m, b.m)
        && close(a.i, b.i)
        && g_ok;
    IsomorphismReport {
        isomorphic,
        same_dimension,
        same_case,
        same_k,
        delta_m,
        delta_g,
        delta_i,
        left: *a,
        right: *b,
    }
}

/// Whether two arbitrage-free markets are Markowitz isomorphic, deciding
/// invariant equality with the first market's `tol_iso`.
pub fn isomorphic(m1: &Market, m2: &Market) -> Result<bool> {
    Ok(isomorphism_report(m1, m2, m1.tol().tol_iso)?.isomorphic)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CostClass {
    Unit,
    Costless,
}

fn cost_class(market: &Market, v: &Portfolio) -> Result<CostClass> {
    let cost = market.cost(v)?;
    let tol = market.tol().tol_match;
    let scale = 1f64.max(market.c().norm() * v.coords().norm());
    if (cost - 1.0).abs() <= tol * scale {
        Ok(CostClass::Unit)
    } else if cost.abs() <= tol * scale {
        Ok(CostClass::Costless)
    } else {
        Err(MarketError::UnsupportedCostClass(cost))
    }
}

/// Whether an isomorphism `m1 → m2` sending `v1` to `v2` exists.
///
/// Both portfolios must have cost 1, in which case the risk-return points
/// `φ` are compared, or both be costless, in which case `ψ` is compared.
pub fn pointed_isomorphic(
    m1: &Market,
    v1: &Portfolio,
    m2: &Market,
    v2: &Portfolio,
) -> Result<bool> {
    for m in [m1, m2] {
        if !degeneracy_report(m).nondegenerate {
            return Err(MarketError::DegenerateMarket(
                "pointed isomorphism requires nondegenerate markets".into(),
            ));
        }
    }
    let class1 = cost_class(m1, v1)?;
    let class2 = cost_class(m2, v2)?;
    if class1 != class2 {
        return Err(MarketError::UnsupportedCostClass(m2.cost(v2)?));
    }
    if m1.n() != m2.n() || !isomorphic(m1, m2)? {
        return Ok(false);
    }
    let tol = m1.tol().tol_iso;
    Ok(match class1 {
        CostClass::Unit => {
            let a = optimize::phi(m1, v1)?;
            let b = optimize::phi(m2, v2)?;
            rel_close(a.rr, b.rr, tol) && rel_close(a.er, b.er, tol)
        }
        CostClass::Costless => {
            let a = optimize::psi(m1, v1)?;
            let b = optimize::psi(m2, v2)?;
            rel_close(a.risk, b.risk, tol) && rel_close(a.payoff, b.payoff, tol)
        }
    })
}
