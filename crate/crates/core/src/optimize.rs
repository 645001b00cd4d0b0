//! Portfolio optimization read off the canonical form.
//!
//! In canonical coordinates `r` is the Euclidean form on the first `k`
//! coordinates and the cost/payoff constraints pin at most two of them, so a
//! risk minimizer sets every other coordinate to zero. Results are pulled back
//! to the original coordinates through the canonical basis.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::classify::{canonicalize, degeneracy_report, CanonicalCase};
use crate::error::{MarketError, Result};
use crate::market::{Market, Portfolio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeasibleRule {
    /// `n = 2`: every cost-1 portfolio is efficient.
    CurveOnly,
    /// `n > 2`: the feasible set is everything on or right of the curve.
    RightOfCurve,
}

/// Efficient frontier `g²(x² − m²) = (y + 1 − i)²`, right arm, in
/// relative-risk (`x`) / expected-return (`y`) coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierCurve {
    pub m: f64,
    pub g: f64,
    pub i: f64,
    pub n: usize,
    pub feasible_rule: FeasibleRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskReturnPoint {
    /// Relative risk `√r(v,v) / c(v)`; negative when the cost is negative.
    pub rr: f64,
    /// Expected return `(p(v) − c(v)) / c(v)`.
    pub er: f64,
    /// Set when `c(v) < 0`.
    pub out_of_domain_sign: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostFreePoint {
    pub risk: f64,
    pub payoff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MutualFundBasis {
    pub funds: Vec<Portfolio>,
    pub contains_riskfree: bool,
}

/// The frontier `{(x, ±g x) : x ≥ 0}` of costless portfolios under `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostlessFrontier {
    pub slope: f64,
}

impl CostlessFrontier {
    pub fn on_frontier(&self, point: CostFreePoint, tol: f64) -> bool {
        point.risk >= -tol
            && (point.payoff.abs() - self.slope * point.risk).abs()
                <= tol * 1f64.max(self.slope * point.risk)
    }

    /// On the frontier or to its right, i.e. `|y| ≤ g x`.
    pub fn on_or_right(&self, point: CostFreePoint, tol: f64) -> bool {
        point.risk >= -tol
            && point.payoff.abs() <= self.slope * point.risk + tol * 1f64.max(self.slope * point.risk)
    }
}

impl FrontierCurve {
    /// Expected return at the vertex, `i − 1`.
    pub fn vertex_y(&self) -> f64 {
        self.i - 1.0
    }

    /// `|g²(x² − m²) − (y + 1 − i)²|`.
    pub fn residual(&self, x: f64, y: f64) -> f64 {
        let d = y + 1.0 - self.i;
        (self.g * self.g * (x * x - self.m * self.m) - d * d).abs()
    }

    /// Relative risk of the frontier point with expected return `y`.
    pub fn x_at(&self, y: f64) -> Result<f64> {
        if !(self.g > 0.0) {
            return Err(MarketError::ZeroG);
        }
        let d = y - self.vertex_y();
        Ok(self.m.hypot(d / self.g))
    }

    pub fn contains(&self, x: f64, y: f64, tol: f64) -> Result<bool> {
        match self.feasible_rule {
            FeasibleRule::RightOfCurve => Ok(x >= self.x_at(y)? - tol),
            FeasibleRule::CurveOnly => Ok(self.residual(x, y)
                <= tol * 1f64.max(self.g * self.g * x * x)
                && x >= self.m - tol),
        }
    }
}

/// `count` frontier points equally spaced in `y` over `[y_min, y_max]`,
/// ascending in `y`.
pub fn frontier_points(
    curve: &FrontierCurve,
    y_min: f64,
    y_max: f64,
    count: usize,
) -> Result<Vec<(f64, f64)>> {
    if count < 2 {
        return Err(MarketError::InvalidArgument("count must be at least 2".into()));
    }
    if !(y_min.is_finite() && y_max.is_finite() && y_min <= y_max) {
        return Err(MarketError::InvalidArgument("y range must be finite and ordered".into()));
    }
    let last = (count - 1) as f64;
    (0..count)
        .map(|j| {
            let y = if j == count - 1 {
                y_max
            } else {
                y_min + (y_max - y_min) * (j as f64) / last
            };
            Ok((curve.x_at(y)?, y))
        })
        .collect()
}

/// The minimum-risk portfolio with the given cost and expected payoff.
///
/// Among minimizers that differ by valueless portfolios the one with zero
/// component along those directions is returned.
pub fn min_risk_portfolio(market: &Market, cost: f64, payoff: f64) -> Result<Portfolio> {
    let form = canonicalize(market)?;
    let inv = form.invariants;
    let n = market.n();
    let tol = market.tol().tol_match;
    let mut u = DVector::zeros(n);
    let infeasible = || MarketError::InfeasibleTarget { cost, payoff };
    // Solve `g · u_j = residual_payoff` for the payoff-carrying coordinate.
    let mut solve_payoff = |slot: Option<usize>, rest: f64| -> Result<()> {
        match slot {
            Some(j) if inv.g > 0.0 => {
                u[j] = rest / inv.g;
                Ok(())
            }
            _ if rest.abs() <= tol * 1f64.max(payoff.abs()) => Ok(()),
            _ => Err(infeasible()),
        }
    };
    match inv.case {
        CanonicalCase::RisklessWithCost => {
            let i = inv.i.unwrap_or(0.0);
            solve_payoff((inv.k >= 1).then_some(0), payoff - i * cost)?;
            u[n - 1] = cost;
        }
        CanonicalCase::NoCostlyRiskless => {
            let (m, i) = (inv.m.unwrap_or(1.0), inv.i.unwrap_or(0.0));
            solve_payoff((inv.k >= 2).then_some(1), payoff - i * cost)?;
            u[0] = m * cost;
        }
        CanonicalCase::ZeroCost => {
            if cost.abs() > tol * 1f64.max(payoff.abs()) {
                return Err(infeasible());
            }
            solve_payoff((inv.k >= 1).then_some(0), payoff)?;
        }
    }
    Ok(Portfolio::new(&form.basis * u))
}

/// One or two portfolios spanning every risk-minimizing portfolio.
pub fn mutual_funds(market: &Market) -> Result<MutualFundBasis> {
    let form = canonicalize(market)?;
    let inv = form.invariants;
    let has_payoff_fund = inv.g_defined && inv.g > 0.0;
    match inv.case {
        CanonicalCase::NoCostlyRiskless => {
            let mut funds = vec![form.basis_vector(0)];
            if inv.k >= 2 && has_payoff_fund {
                funds.push(form.basis_vector(1));
            }
            Ok(MutualFundBasis { funds, contains_riskfree: false })
        }
        CanonicalCase::RisklessWithCost => {
            let mut funds = Vec::with_capacity(2);
            if inv.k >= 1 && has_payoff_fund {
                funds.push(form.basis_vector(0));
            }
            funds.push(form.basis_vector(inv.n - 1));
            Ok(MutualFundBasis { funds, contains_riskfree: true })
        }
        CanonicalCase::ZeroCost => Err(MarketError::DegenerateMarket(
            "mutual funds are undefined when every portfolio is costless".into(),
        )),
    }
}

/// Frontier parameters of a nondegenerate market with nonzero cost.
pub fn efficient_frontier(market: &Market) -> Result<FrontierCurve> {
    let c_norm = market.c().norm();
    if c_norm <= market.tol().tol_rank * 1f64.max(market.p().norm()).max(c_norm) {
        return Err(MarketError::ZeroCostMarket);
    }
    if !degeneracy_report(market).nondegenerate {
        return Err(MarketError::DegenerateMarket(
            "efficient frontier requires a nondegenerate market".into(),
        ));
    }
    let n = market.n();
    if n < 2 {
        return Err(MarketError::DegenerateMarket("frontier needs n ≥ 2".into()));
    }
    let form = canonicalize(market)?;
    Ok(FrontierCurve {
        m: form.m().unwrap_or(0.0),
        g: form.g(),
        i: form.i().unwrap_or(0.0),
        n,
        feasible_rule: if n == 2 { FeasibleRule::CurveOnly } else { FeasibleRule::RightOfCurve },
    })
}

/// Whether `(x, y)` lies in the image of `φ`.
pub fn feasible(market: &Market, x: f64, y: f64) -> Result<bool> {
    let curve = efficient_frontier(market)?;
    curve.contains(x, y, market.tol().tol_match)
}

/// Risk-return point `(RR, ER)` of a portfolio with nonzero cost.
pub fn phi(market: &Market, v: &Portfolio) -> Result<RiskReturnPoint> {
    let cost = market.cost(v)?;
    let scale = 1f64.max(market.c().norm() * v.coords().norm());
    if cost.abs() <= market.tol().tol_match * scale {
        return Err(MarketError::ZeroCostPortfolio);
    }
    let risk = market.risk(v)?;
    let payoff = market.payoff(v)?;
    Ok(RiskReturnPoint {
        rr: risk / cost,
        er: (payoff - cost) / cost,
        out_of_domain_sign: cost < 0.0,
    })
}

/// `(√r(v,v), p(v))`.
pub fn psi(market: &Market, v: &Portfolio) -> Result<CostFreePoint> {
    Ok(CostFreePoint { risk: market.risk(v)?, payoff: market.payoff(v)? })
}

pub fn costless_frontier(market: &Market) -> Result<CostlessFrontier> {
    let form = canonicalize(market)?;
    if !form.g_defined() || !(form.g() > 0.0) {
        return Err(MarketError::GNotPositive);
    }
    Ok(CostlessFrontier { slope: form.g() })
}
