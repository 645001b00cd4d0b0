//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 usage, 2 domain verdict (arbitrage found, not
//! isomorphic, infeasible target, ...), 3 validation or parse failure, 4 IO.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::classify::{self, CanonicalCase};
use crate::error::MarketError;
use crate::io::{self, DataError, FrontierMeta, MarketFile};
use crate::market::Market;
use crate::optimize;
use crate::tolerance::ToleranceConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERDICT: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "markowitz", version, about = "Classify Markowitz markets and optimize portfolios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the canonical case, invariants (k, m, g, i) and degeneracy report
    Classify { market: PathBuf },
    /// Decide whether two markets are isomorphic
    Isomorphic {
        a: PathBuf,
        b: PathBuf,
        /// Relative tolerance for comparing invariants
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Search for a riskless, costless portfolio with positive payoff
    Arbitrage { market: PathBuf },
    /// Minimum-risk portfolio for a target cost and expected payoff
    Optimize {
        market: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        cost: f64,
        #[arg(long, allow_hyphen_values = true)]
        payoff: f64,
    },
    /// Mutual-fund basis spanning all risk-minimizing portfolios
    Funds { market: PathBuf },
    /// Sample the efficient frontier to CSV, with feasible-region metadata
    Frontier {
        market: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        ymin: f64,
        #[arg(long, allow_hyphen_values = true)]
        ymax: f64,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        /// Metadata path (default: OUT with extension `meta.json`)
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Estimate a market file from payoff history and current prices
    Estimate {
        #[arg(long)]
        returns: PathBuf,
        #[arg(long)]
        prices: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Outcome of a command: exit code plus any diagnostic.
struct Failure {
    code: i32,
    message: String,
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        let code = match &e {
            DataError::Io { .. } => EXIT_IO,
            DataError::Parse { .. } | DataError::Validation(_) | DataError::InsufficientData { .. } => {
                EXIT_VALIDATION
            }
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<MarketError> for Failure {
    fn from(e: MarketError) -> Self {
        let code = match e {
            MarketError::NonFinite { .. }
            | MarketError::NotSymmetric { .. }
            | MarketError::NotPositiveSemidefinite { .. }
            | MarketError::DimensionMismatch { .. }
            | MarketError::EmptyMarket => EXIT_VALIDATION,
            MarketError::InvalidArgument(_) => EXIT_USAGE,
            _ => EXIT_VERDICT,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_IO, message: e.to_string() }
    }
}

type CmdResult = Result<i32, Failure>;

/// Formats a number for human-facing output: 12 decimals, trailing zeros
/// trimmed, values below 1e-12 in magnitude printed as `0`.
pub fn fmt_num(x: f64) -> String {
    if x.abs() < 1e-12 {
        return "0".into();
    }
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn fmt_vec(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(", "))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_string(), fmt_num)
}

fn fmt_delta(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |d| format!("{d:.3e}"))
}

fn open_market(path: &Path) -> Result<Market, Failure> {
    let spec = io::load_market(path)?;
    Ok(Market::validate(spec, ToleranceConfig::default())?)
}

/// Runs the CLI with explicit argument list and output streams; returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::Classify { market } => cmd_classify(&market, out),
        Command::Isomorphic { a, b, tol } => cmd_isomorphic(&a, &b, tol, out),
        Command::Arbitrage { market } => cmd_arbitrage(&market, out),
        Command::Optimize { market, cost, payoff } => cmd_optimize(&market, cost, payoff, out),
        Command::Funds { market } => cmd_funds(&market, out),
        Command::Frontier { market, ymin, ymax, count, out: path, meta } => {
            cmd_frontier(&market, ymin, ymax, count, &path, meta.as_deref(), out)
        }
        Command::Estimate { returns, prices, out: path } => cmd_estimate(&returns, &prices, &path, out),
    }
}

fn cmd_classify(path: &Path, out: &mut dyn Write) -> CmdResult {
    let market = open_market(path)?;
    let report = classify::degeneracy_report(&market);
    if let Some(w) = &report.arbitrage {
        return Err(Failure {
            code: EXIT_VERDICT,
            message: format!("market admits an arbitrage portfolio {}", fmt_vec(w.as_slice())),
        });
    }
    let form = classify::canonicalize(&market)?;
    let inv = form.invariants;
    let m = match inv.case {
        CanonicalCase::ZeroCost => None,
        _ => inv.m,
    };
    writeln!(
        out,
        "{} k={} m={} g={} i={}",
        inv.case,
        inv.k,
        fmt_opt(m),
        fmt_num(inv.g),
        fmt_opt(inv.i)
    )?;
    writeln!(out, "g_defined={}", inv.g_defined)?;
    writeln!(out, "residual={:.3e}", form.residual)?;
    writeln!(out, "arbitrage=none")?;
    writeln!(out, "valueless_dim={}", report.valueless_basis.len())?;
    for (j, v) in report.valueless_basis.iter().enumerate() {
        writeln!(out, "valueless{}={}", j + 1, fmt_vec(v.as_slice()))?;
    }
    writeln!(out, "cp_independent={}", report.cp_independent)?;
    writeln!(out, "nondegenerate={}", report.nondegenerate)?;
    Ok(EXIT_OK)
}

fn cmd_isomorphic(a: &Path, b: &Path, tol: Option<f64>, out: &mut dyn Write) -> CmdResult {
    let ma = open_market(a)?;
    let mb = open_market(b)?;
    let tol = tol.unwrap_or(ma.tol().tol_iso);
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Failure { code: EXIT_USAGE, message: "--tol must be a non-negative number".into() });
    }
    let report = classify::isomorphism_report(&ma, &mb, tol)?;
    writeln!(out, "isomorphic={}", report.isomorphic)?;
    writeln!(out, "n={}/{}", report.left.n, report.right.n)?;
    writeln!(out, "case={}/{}", report.left.case, report.right.case)?;
    writeln!(out, "k={}/{}", report.left.k, report.right.k)?;
    writeln!(out, "delta_m={}", fmt_delta(report.delta_m))?;
    writeln!(out, "delta_g={}", fmt_delta(report.delta_g))?;
    writeln!(out, "delta_i={}", fmt_delta(report.delta_i))?;
    Ok(if report.isomorphic { EXIT_OK } else { EXIT_VERDICT })
}

fn cmd_arbitrage(path: &Path, out: &mut dyn Write) -> CmdResult {
    let market = open_market(path)?;
    match classify::find_arbitrage(&market) {
        None => {
            writeln!(out, "arbitrage-free")?;
            Ok(EXIT_OK)
        }
        Some(w) => {
            writeln!(out, "witness={}", fmt_vec(w.as_slice()))?;
            Ok(EXIT_VERDICT)
        }
    }
}

fn cmd_optimize(path: &Path, cost: f64, payoff: f64, out: &mut dyn Write) -> CmdResult {
    let market = open_market(path)?;
    let v = optimize::min_risk_portfolio(&market, cost, payoff)?;
    writeln!(out, "portfolio={}", fmt_vec(v.as_slice()))?;
    writeln!(out, "risk={}", fmt_num(market.risk(&v)?))?;
    match optimize::phi(&market, &v) {
        Ok(pt) => {
            writeln!(out, "phi=({}, {})", fmt_num(pt.rr), fmt_num(pt.er))?;
            if pt.out_of_domain_sign {
                writeln!(out, "note=negative cost, relative risk is signed")?;
            }
        }
        Err(MarketError::ZeroCostPortfolio) => {
            let pt = optimize::psi(&market, &v)?;
            writeln!(out, "psi=({}, {})", fmt_num(pt.risk), fmt_num(pt.payoff))?;
        }
        Err(e) => return Err(e.into()),
    }
    Ok(EXIT_OK)
}

fn cmd_funds(path: &Path, out: &mut dyn Write) -> CmdResult {
    let market = open_market(path)?;
    let basis = optimize::mutual_funds(&market)?;
    writeln!(out, "contains_riskfree={}", basis.contains_riskfree)?;
    for (j, fund) in basis.funds.iter().enumerate() {
        writeln!(out, "fund{}={}", j + 1, fmt_vec(fund.as_slice()))?;
    }
    Ok(EXIT_OK)
}

fn default_meta_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

fn cmd_frontier(
    path: &Path,
    ymin: f64,
    ymax: f64,
    count: usize,
    csv_path: &Path,
    meta_path: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let market = open_market(path)?;
    let curve = optimize::efficient_frontier(&market)?;
    let mut points = optimize::frontier_points(&curve, ymin, ymax, count)?;
    // The vertex row is always emitted when it falls inside the range.
    let vy = curve.vertex_y();
    if ymin <= vy && vy <= ymax && !points.iter().any(|&(_, y)| y == vy) {
        let at = points.iter().position(|&(_, y)| y > vy).unwrap_or(points.len());
        points.insert(at, (curve.m, vy));
    }
    io::write_frontier_csv(csv_path, &points)?;
    let meta_path = meta_path.map_or_else(|| default_meta_path(csv_path), Path::to_path_buf);
    io::write_frontier_meta(&meta_path, &FrontierMeta::new(&curve))?;
    writeln!(
        out,
        "m={} g={} i={} rule={:?} rows={}",
        fmt_num(curve.m),
        fmt_num(curve.g),
        fmt_num(curve.i),
        curve.feasible_rule,
        points.len()
    )?;
    Ok(EXIT_OK)
}

fn cmd_estimate(returns: &Path, prices: &Path, path: &Path, out: &mut dyn Write) -> CmdResult {
    let table = io::load_returns(returns, prices)?;
    let spec = io::estimate_market(&table)?;
    Market::validate(spec.clone(), ToleranceConfig::default())?;
    let mut file = MarketFile::from_spec(&spec);
    file.labels = Some(table.assets.clone());
    file.meta.insert("observations".into(), table.rows.len().to_string());
    file.meta.insert("covariance_divisor".into(), "T-1".into());
    io::write_market_file(&file, path)?;
    writeln!(out, "estimated n={} from T={} observations", spec.n(), table.rows.len())?;
    Ok(EXIT_OK)
}
