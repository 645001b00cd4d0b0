//! Classification of Markowitz markets up to isomorphism and the portfolio
//! optimization results that follow from it.
//!
//! A market is a positive-semidefinite covariance form `r` with cost and
//! expected-payoff covectors `c`, `p` on `R^n`. [`classify::canonicalize`]
//! reduces any arbitrage-free market to one of three model markets indexed by
//! the invariants `(k, m, g, i)`; [`optimize`] reads risk minimizers, mutual
//! funds and the efficient frontier straight off that form.

pub mod classify;
pub mod cli;
pub mod error;
pub mod io;
mod linalg;
pub mod market;
pub mod optimize;
pub mod tolerance;

pub use classify::{
    canonicalize, degeneracy_report, find_arbitrage, invariants_dual, isomorphic,
    isomorphism_report, pointed_isomorphic, CanonicalCase, CanonicalForm, DegeneracyReport,
    DualInvariants, Invariants, IsomorphismReport,
};
pub use error::{MarketError, Result};
pub use market::{is_morphism, Market, MarketSpec, Portfolio, Subspace};
pub use optimize::{
    costless_frontier, efficient_frontier, feasible, frontier_points, min_risk_portfolio,
    mutual_funds, phi, psi, CostFreePoint, CostlessFrontier, FeasibleRule, FrontierCurve,
    MutualFundBasis, RiskReturnPoint,
};
pub use tolerance::ToleranceConfig;
