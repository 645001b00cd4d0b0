use thiserror::Error;

/// Errors raised by market construction, classification and optimization.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarketError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("market must have at least one coordinate")]
    EmptyMarket,
    #[error("non-finite entry in {field}")]
    NonFinite { field: &'static str },
    #[error("covariance matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("covariance matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
    #[error("transform is singular or too ill-conditioned to invert")]
    SingularTransform,
    #[error("market admits an arbitrage portfolio")]
    ArbitrageMarket,
    #[error("Gram-Schmidt pivot below tolerance: {0}")]
    IllConditioned(String),
    #[error("market is degenerate: {0}")]
    DegenerateMarket(String),
    #[error("market has zero cost functional")]
    ZeroCostMarket,
    #[error("no portfolio meets cost {cost} and payoff {payoff}")]
    InfeasibleTarget { cost: f64, payoff: f64 },
    #[error("portfolio has zero cost; risk-return map is undefined")]
    ZeroCostPortfolio,
    #[error("frontier slope g is zero; frontier is the vertical ray x = m")]
    ZeroG,
    #[error("costless frontier requires g > 0")]
    GNotPositive,
    #[error("portfolio cost {0} is neither 1 nor 0")]
    UnsupportedCostClass(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = MarketError> = std::result::Result<T, E>;
