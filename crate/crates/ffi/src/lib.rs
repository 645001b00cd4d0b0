//! C ABI over the `markowitz` crate.
//!
//! Markets are passed around as opaque `MkMarket` handles created by
//! [`mk_market_new`] or [`mk_market_load`] and released with
//! [`mk_market_free`]. Every fallible call returns an [`MkStatus`]; on failure
//! a human-readable message is kept per thread and can be copied out with
//! [`mk_last_error_message`].
//!
//! Matrices are dense row-major `n × n` arrays of `double`. Output vectors are
//! caller-allocated; when the buffer is shorter than `n` the call fails with
//! `MK_STATUS_BUFFER_TOO_SMALL` and writes nothing.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use markowitz::io::{load_market, DataError};
use markowitz::{
    canonicalize, efficient_frontier, find_arbitrage, frontier_points, invariants_dual,
    isomorphic, min_risk_portfolio, phi, CanonicalCase, FeasibleRule, FrontierCurve, Market,
    MarketError, MarketSpec, Portfolio,
};
use nalgebra::{DMatrix, DVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    DimensionMismatch = 10,
    EmptyMarket = 11,
    NonFinite = 12,
    NotSymmetric = 13,
    NotPositiveSemidefinite = 14,
    SingularTransform = 15,
    Arbitrage = 20,
    IllConditioned = 21,
    Degenerate = 22,
    ZeroCostMarket = 23,
    InfeasibleTarget = 24,
    ZeroCostPortfolio = 25,
    ZeroG = 26,
    GNotPositive = 27,
    UnsupportedCostClass = 28,
    Io = 30,
    Parse = 31,
    InsufficientData = 32,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MkCase {
    RisklessWithCost = 0,
    NoCostlyRiskless = 1,
    ZeroCost = 2,
}

impl From<CanonicalCase> for MkCase {
    fn from(c: CanonicalCase) -> Self {
        match c {
            CanonicalCase::RisklessWithCost => MkCase::RisklessWithCost,
            CanonicalCase::NoCostlyRiskless => MkCase::NoCostlyRiskless,
            CanonicalCase::ZeroCost => MkCase::ZeroCost,
        }
    }
}

/// Invariants of the canonical form. `m` and `i` are NaN when undefined for
/// the case; `g` is meaningful only when `g_defined` is set.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MkClassification {
    pub case_: MkCase,
    pub n: usize,
    pub k: usize,
    pub m: f64,
    pub g: f64,
    pub i: f64,
    pub g_defined: bool,
    pub residual: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MkDualInvariants {
    pub m: f64,
    pub g: f64,
    pub i: f64,
}

/// Frontier `g²(x² − m²) = (y + 1 − i)²`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MkFrontier {
    pub m: f64,
    pub g: f64,
    pub i: f64,
    pub n: usize,
    /// Set when every cost-1 portfolio lies on the curve (`n = 2`).
    pub curve_only: bool,
}

impl From<FrontierCurve> for MkFrontier {
    fn from(c: FrontierCurve) -> Self {
        MkFrontier {
            m: c.m,
            g: c.g,
            i: c.i,
            n: c.n,
            curve_only: c.feasible_rule == FeasibleRule::CurveOnly,
        }
    }
}

impl From<&MkFrontier> for FrontierCurve {
    fn from(f: &MkFrontier) -> Self {
        FrontierCurve {
            m: f.m,
            g: f.g,
            i: f.i,
            n: f.n,
            feasible_rule: if f.curve_only {
                FeasibleRule::CurveOnly
            } else {
                FeasibleRule::RightOfCurve
            },
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MkRiskReturn {
    pub rr: f64,
    pub er: f64,
    pub out_of_domain_sign: bool,
}

/// Opaque market handle.
pub struct MkMarket {
    inner: Market,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(MkStatus, String);

impl From<MarketError> for Failure {
    fn from(e: MarketError) -> Self {
        use MarketError as E;
        let status = match &e {
            E::DimensionMismatch { .. } => MkStatus::DimensionMismatch,
            E::EmptyMarket => MkStatus::EmptyMarket,
            E::NonFinite { .. } => MkStatus::NonFinite,
            E::NotSymmetric { .. } => MkStatus::NotSymmetric,
            E::NotPositiveSemidefinite { .. } => MkStatus::NotPositiveSemidefinite,
            E::SingularTransform => MkStatus::SingularTransform,
            E::ArbitrageMarket => MkStatus::Arbitrage,
            E::IllConditioned(_) => MkStatus::IllConditioned,
            E::DegenerateMarket(_) => MkStatus::Degenerate,
            E::ZeroCostMarket => MkStatus::ZeroCostMarket,
            E::InfeasibleTarget { .. } => MkStatus::InfeasibleTarget,
            E::ZeroCostPortfolio => MkStatus::ZeroCostPortfolio,
            E::ZeroG => MkStatus::ZeroG,
            E::GNotPositive => MkStatus::GNotPositive,
            E::UnsupportedCostClass(_) => MkStatus::UnsupportedCostClass,
            E::InvalidArgument(_) => MkStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Validation(inner) => inner.into(),
            DataError::Io { .. } => Failure(MkStatus::Io, e.to_string()),
            DataError::Parse { .. } => Failure(MkStatus::Parse, e.to_string()),
            DataError::InsufficientData { .. } => Failure(MkStatus::InsufficientData, e.to_string()),
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(MkStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            MkStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MkStatus::Panic
        }
    }
}

unsafe fn market_ref<'a>(m: *const MkMarket) -> Result<&'a Market, Failure> {
    m.as_ref().map(|h| &h.inner).ok_or_else(|| null("market"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out(out: *mut f64, out_len: usize, values: &[f64]) -> Result<(), Failure> {
    if out_len < values.len() {
        return Err(Failure(
            MkStatus::BufferTooSmall,
            format!("buffer holds {out_len} values, need {}", values.len()),
        ));
    }
    if values.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

fn portfolio(market: &Market, v: &[f64]) -> Result<Portfolio, Failure> {
    if v.len() != market.n() {
        return Err(MarketError::DimensionMismatch { expected: market.n(), got: v.len() }.into());
    }
    Ok(Portfolio::from_slice(v))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn mk_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Validates a market from a row-major `n × n` covariance and length-`n`
/// cost and payoff vectors.
///
/// # Safety
/// `r` must point to `n * n` doubles, `c` and `p` to `n` doubles each, and
/// `out` to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn mk_market_new(
    n: usize,
    r: *const f64,
    c: *const f64,
    p: *const f64,
    out: *mut *mut MkMarket,
) -> MkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let len = n.checked_mul(n).ok_or_else(|| {
            Failure(MkStatus::InvalidArgument, "dimension overflows".into())
        })?;
        let r = slice(r, len, "r")?;
        let c = slice(c, n, "c")?;
        let p = slice(p, n, "p")?;
        let spec = MarketSpec::new(
            DMatrix::from_row_slice(n, n, r),
            DVector::from_column_slice(c),
            DVector::from_column_slice(p),
        );
        let inner = Market::new(spec)?;
        *out = Box::into_raw(Box::new(MkMarket { inner }));
        Ok(())
    })
}

/// Loads and validates a JSON market file.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mk_market_load(path: *const c_char, out: *mut *mut MkMarket) -> MkStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(MkStatus::InvalidArgument, "path is not UTF-8".into()))?;
        let spec = load_market(Path::new(path))?;
        let inner = Market::new(spec)?;
        *out = Box::into_raw(Box::new(MkMarket { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `market` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mk_market_free(market: *mut MkMarket) {
    if !market.is_null() {
        drop(Box::from_raw(market));
    }
}

/// Number of assets, or 0 for a null handle.
///
/// # Safety
/// `market` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mk_market_dim(market: *const MkMarket) -> usize {
    market.as_ref().map_or(0, |h| h.inner.n())
}

/// # Safety
/// `market` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mk_classify(
    market: *const MkMarket,
    out: *mut MkClassification,
) -> MkStatus {
    guard(|| {
        let m = market_ref(market)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let form = canonicalize(m)?;
        let inv = form.invariants;
        *out = MkClassification {
            case_: inv.case.into(),
            n: inv.n,
            k: inv.k,
            m: inv.m.unwrap_or(f64::NAN),
            g: inv.g,
            i: inv.i.unwrap_or(f64::NAN),
            g_defined: inv.g_defined,
            residual: form.residual,
        };
        Ok(())
    })
}

/// Writes the canonical basis as a row-major `n × n` matrix whose columns are
/// the canonical basis portfolios.
///
/// # Safety
/// `market` must be a live handle and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mk_canonical_basis(
    market: *const MkMarket,
    out: *mut f64,
    out_len: usize,
) -> MkStatus {
    guard(|| {
        let m = market_ref(market)?;
        let form = canonicalize(m)?;
        let rows: Vec<f64> = form.basis.transpose().iter().copied().collect();
        write_out(out, out_len, &rows)
    })
}

/// `(m, g, i)` through the dual of `r + c ⊗ c`; nondegenerate markets only.
///
/// # Safety
/// `market` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mk_invariants_dual(
    market: *const MkMarket,
    out: *mut MkDualInvariants,
) -> MkStatus {
    guard(|| {
        let m = market_ref(market)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let d = invariants_dual(m)?;
        *out = MkDualInvariants { m: d.m, g: d.g, i: d.i };
        Ok(())
    })
}

/// # Safety
/// `a`, `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mk_isomorphic(
    a: *const MkMarket,
    b: *const MkMarket,
    out: *mut bool,
) -> MkStatus {
    guard(|| {
        let a = market_ref(a)?;
        let b = market_ref(b)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = isomorphic(a, b)?;
        Ok(())
    })
}

/// Writes an arbitrage portfolio into `out` and sets `found` when one exists.
///
/// # Safety
/// `market` must be a live handle, `found` writable, `out` sized `out_len`.
#[no_mangle]
pub unsafe extern "C" fn mk_find_arbitrage(
    market: *const MkMarket,
    out: *mut f64,
    out_len: usize,
    found: *mut bool,
) -> MkStatus {
    guard(|| {
        let m = market_ref(market)?;
        let found = found.as_mut().ok_or_else(|| null("found"))?;
        match find_arbitrage(m) {
            Some(v) => {
                write_out(out, out_len, v.as_slice())?;
                *found = true;
            }
            None => *found = false,
        }
        Ok(())
    })
}

/// # Safety
/// `market` must be a live handle and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mk_min_risk_portfolio(
    market: *const MkMarket,
    cost: f64,
    payoff: f64,
    out: *mut f64,
    out_len: usize,
) -> MkStatus {
    guard(|| {
        let m = market_ref(market)?;
        let v = min_risk_portfolio(m, cost, payoff)?;
        write_out(out, out_len, v.as_slice())
    })
}

/// # Safety
/// `market` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mk_efficient_frontier(
    market: *const MkMarket,
    out: *mut MkFrontier,
) -> MkStatus {
    guard(|| {
        let m = market_ref(market)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = efficient_frontier(m)?.into();
        Ok(())
    })
}

/// Samples `count` frontier points equally spaced in `y` over
/// `[y_min, y_max]` into `xs` and `ys`.
///
/// # Safety
/// `frontier` must be readable; `xs` and `ys` must each hold `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn mk_frontier_points(
    frontier: *const MkFrontier,
    y_min: f64,
    y_max: f64,
    count: usize,
    xs: *mut f64,
    ys: *mut f64,
) -> MkStatus {
    guard(|| {
        let f = frontier.as_ref().ok_or_else(|| null("frontier"))?;
        let pts = frontier_points(&f.into(), y_min, y_max, count)?;
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        write_out(xs, count, &x)?;
        write_out(ys, count, &y)
    })
}

/// `√r(v, v)` for a portfolio of length `n`.
///
/// # Safety
/// `market` must be a live handle, `v` must hold `len` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mk_risk(
    market: *const MkMarket,
    v: *const f64,
    len: usize,
    out: *mut f64,
) -> MkStatus {
    guard(|| {
        let m = market_ref(market)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let v = portfolio(m, slice(v, len, "v")?)?;
        *out = m.risk(&v)?;
        Ok(())
    })
}

/// Relative risk and expected return of a portfolio with nonzero cost.
///
/// # Safety
/// `market` must be a live handle, `v` must hold `len` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mk_risk_return(
    market: *const MkMarket,
    v: *const f64,
    len: usize,
    out: *mut MkRiskReturn,
) -> MkStatus {
    guard(|| {
        let m = market_ref(market)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let v = portfolio(m, slice(v, len, "v")?)?;
        let pt = phi(m, &v)?;
        *out = MkRiskReturn { rr: pt.rr, er: pt.er, out_of_domain_sign: pt.out_of_domain_sign };
        Ok(())
    })
}
