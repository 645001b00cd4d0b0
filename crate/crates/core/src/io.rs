//! Market files, return-history ingestion and frontier CSV output.
//!
//! A market file is a JSON document:
//!
//! ```json
//! {
//!   "n": 2,
//!   "r": [[1.0, 0.0], [0.0, 1.0]],
//!   "c": [1.0, 0.0],
//!   "p": [0.0, 1.0],
//!   "labels": ["A", "B"],
//!   "meta": {"source": "desk"}
//! }
//! ```
//!
//! Numbers are written in shortest round-trip form and parsed with correct
//! rounding, so `load(save(x))` is bit-exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::MarketError;
use crate::market::{Market, MarketSpec};
use crate::optimize::FrontierCurve;
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("validation failed: {0}")]
    Validation(#[from] MarketError),
    #[error("need at least 2 observations, got {rows}")]
    InsufficientData { rows: usize },
}

impl DataError {
    fn parse(path: &Path, message: impl Into<String>) -> Self {
        DataError::Parse { path: path.to_path_buf(), message: message.into() }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        DataError::Io { path: path.to_path_buf(), source }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketFile {
    pub n: usize,
    pub r: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

impl MarketFile {
    pub fn from_spec(spec: &MarketSpec) -> Self {
        Self {
            n: spec.n(),
            r: spec.r_rows(),
            c: spec.c.iter().copied().collect(),
            p: spec.p.iter().copied().collect(),
            labels: None,
            meta: BTreeMap::new(),
        }
    }

    /// Checks array shapes against `n`, naming the offending field.
    pub fn check_shape(&self) -> Result<(), String> {
        let n = self.n;
        if n == 0 {
            return Err("field `n`: must be positive".into());
        }
        if self.r.len() != n {
            return Err(format!("field `r`: expected {n} rows, found {}", self.r.len()));
        }
        for (a, row) in self.r.iter().enumerate() {
            if row.len() != n {
                return Err(format!("field `r`: row {a} has {} entries, expected {n}", row.len()));
            }
        }
        if self.c.len() != n {
            return Err(format!("field `c`: expected {n} entries, found {}", self.c.len()));
        }
        if self.p.len() != n {
            return Err(format!("field `p`: expected {n} entries, found {}", self.p.len()));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != n {
                return Err(format!("field `labels`: expected {n} entries, found {}", labels.len()));
            }
        }
        Ok(())
    }

    pub fn to_spec(&self) -> MarketSpec {
        let flat: Vec<f64> = self.r.iter().flatten().copied().collect();
        MarketSpec::new(
            DMatrix::from_row_slice(self.n, self.n, &flat),
            DVector::from_column_slice(&self.c),
            DVector::from_column_slice(&self.p),
        )
    }

    pub fn to_json(&self) -> String {
        let num = |x: f64| serde_json::to_string(&x).expect("finite numbers serialize");
        let list = |xs: &[f64]| xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", ");
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"n\": {},", self.n);
        out.push_str("  \"r\": [\n");
        for (a, row) in self.r.iter().enumerate() {
            let sep = if a + 1 == self.r.len() { "" } else { "," };
            let _ = writeln!(out, "    [{}]{sep}", list(row));
        }
        out.push_str("  ],\n");
        let _ = write!(out, "  \"c\": [{}],\n  \"p\": [{}]", list(&self.c), list(&self.p));
        let text = |s: &String| serde_json::to_string(s).expect("strings serialize");
        if let Some(labels) = &self.labels {
            let items: Vec<String> = labels.iter().map(text).collect();
            let _ = write!(out, ",\n  \"labels\": [{}]", items.join(", "));
        }
        if !self.meta.is_empty() {
            let items: Vec<String> =
                self.meta.iter().map(|(k, v)| format!("{}: {}", text(k), text(v))).collect();
            let _ = write!(out, ",\n  \"meta\": {{{}}}", items.join(", "));
        }
        out.push_str("\n}\n");
        out
    }
}

pub fn read_market_file(path: &Path) -> Result<MarketFile, DataError> {
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    let file: MarketFile = serde_json::from_str(&text).map_err(|e| DataError::parse(path, e.to_string()))?;
    file.check_shape().map_err(|m| DataError::parse(path, m))?;
    Ok(file)
}

/// Reads a market file and checks it validates under default tolerances.
/// The returned spec carries the numbers exactly as stored.
pub fn load_market(path: &Path) -> Result<MarketSpec, DataError> {
    let spec = read_market_file(path)?.to_spec();
    Market::validate(spec.clone(), ToleranceConfig::default())?;
    Ok(spec)
}

pub fn save_market(spec: &MarketSpec, path: &Path) -> Result<(), DataError> {
    write_market_file(&MarketFile::from_spec(spec), path)
}

pub fn write_market_file(file: &MarketFile, path: &Path) -> Result<(), DataError> {
    fs::write(path, file.to_json()).map_err(|e| DataError::io(path, e))
}

/// Per-period payoff observations (rows) for `n` assets, plus current prices.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsTable {
    pub assets: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub prices: Vec<f64>,
}

/// Market whose payoff is the sample mean, covariance the unbiased (`T − 1`)
/// sample covariance and cost the current price.
pub fn estimate_market(table: &ReturnsTable) -> Result<MarketSpec, DataError> {
    let t = table.rows.len();
    if t < 2 {
        return Err(DataError::InsufficientData { rows: t });
    }
    let n = table.prices.len();
    if let Some(bad) = table.rows.iter().find(|row| row.len() != n) {
        return Err(MarketError::DimensionMismatch { expected: n, got: bad.len() }.into());
    }
    let obs = DMatrix::from_fn(t, n, |row, col| table.rows[row][col]);
    let mean: DVector<f64> = obs.row_mean().transpose();
    let centered = DMatrix::from_fn(t, n, |row, col| obs[(row, col)] - mean[col]);
    let r = centered.transpose() * &centered / (t as f64 - 1.0);
    Ok(MarketSpec::new(r, DVector::from_column_slice(&table.prices), mean))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>, DataError> {
    let file = fs::File::open(path).map_err(|e| DataError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(file))
}

fn parse_row(path: &Path, line: usize, record: &csv::StringRecord, width: usize) -> Result<Vec<f64>, DataError> {
    if record.len() != width {
        return Err(DataError::parse(
            path,
            format!("line {line}: expected {width} cells, found {}", record.len()),
        ));
    }
    record
        .iter()
        .enumerate()
        .map(|(col, cell)| {
            if cell.is_empty() {
                return Err(DataError::parse(path, format!("line {line}, column {}: missing value", col + 1)));
            }
            cell.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| DataError::parse(path, format!("line {line}, column {}: not a number: {cell:?}", col + 1)))
        })
        .collect()
}

/// Reads a returns CSV: a header of asset names, then one observation per row.
pub fn read_returns_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), DataError> {
    let mut records = csv_reader(path)?.into_records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| DataError::parse(path, e.to_string()))?,
        None => return Err(DataError::parse(path, "empty file")),
    };
    let names: Vec<String> = header.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (idx, rec) in records.enumerate() {
        let rec = rec.map_err(|e| DataError::parse(path, e.to_string()))?;
        rows.push(parse_row(path, idx + 2, &rec, names.len())?);
    }
    Ok((names, rows))
}

/// Reads a prices CSV: one row of prices, optionally preceded by a header
/// that must match `assets`.
pub fn read_prices_csv(path: &Path, assets: &[String]) -> Result<Vec<f64>, DataError> {
    let records: Vec<csv::StringRecord> = csv_reader(path)?
        .into_records()
        .collect::<Result<_, _>>()
        .map_err(|e| DataError::parse(path, e.to_string()))?;
    let numeric = |rec: &csv::StringRecord| rec.iter().all(|c| c.parse::<f64>().is_ok());
    match records.as_slice() {
        [row] if numeric(row) => parse_row(path, 1, row, assets.len()),
        [header, row] => {
            let names: Vec<&str> = header.iter().collect();
            if names != assets.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(DataError::parse(path, "line 1: header does not match returns header"));
            }
            parse_row(path, 2, row, assets.len())
        }
        _ => Err(DataError::parse(path, "expected a single row of prices")),
    }
}

pub fn load_returns(returns: &Path, prices: &Path) -> Result<ReturnsTable, DataError> {
    let (assets, rows) = read_returns_csv(returns)?;
    let prices = read_prices_csv(prices, &assets)?;
    Ok(ReturnsTable { assets, rows, prices })
}

/// Writes `y,x` rows in the given order.
pub fn write_frontier_csv(path: &Path, points: &[(f64, f64)]) -> Result<(), DataError> {
    let mut out = String::from("y,x\n");
    for (x, y) in points {
        let _ = writeln!(out, "{y},{x}");
    }
    fs::write(path, out).map_err(|e| DataError::io(path, e))
}

/// Boundary description of the feasible region accompanying a frontier CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierMeta {
    pub m: f64,
    pub g: f64,
    pub i: f64,
    pub n: usize,
    pub feasible_rule: String,
    pub vertex_x: f64,
    pub vertex_y: f64,
    /// Asymptotes `y = (i − 1) ± g x`.
    pub asymptote_slope: f64,
    pub asymptote_intercept: f64,
}

impl FrontierMeta {
    pub fn new(curve: &FrontierCurve) -> Self {
        Self {
            m: curve.m,
            g: curve.g,
            i: curve.i,
            n: curve.n,
            feasible_rule: format!("{:?}", curve.feasible_rule),
            vertex_x: curve.m,
            vertex_y: curve.vertex_y(),
            asymptote_slope: curve.g,
            asymptote_intercept: curve.vertex_y(),
        }
    }
}

pub fn write_frontier_meta(path: &Path, meta: &FrontierMeta) -> Result<(), DataError> {
    let mut text = serde_json::to_string_pretty(meta).expect("meta serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| DataError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_spec() -> MarketSpec {
        MarketSpec::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[1.0, 0.0], &[0.0, 1.0]).unwrap()
    }

    #[test]
    fn save_then_load_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_market(&unit_spec(), &path).unwrap();
        assert_eq!(load_market(&path).unwrap(), unit_spec());
    }

    #[test]
    fn wrong_shape_names_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        fs::write(&path, r#"{"n": 2, "r": [[1, 0, 0], [0, 1, 0]], "c": [1, 0], "p": [0, 1]}"#).unwrap();
        let err = load_market(&path).unwrap_err();
        match err {
            DataError::Parse { message, .. } => assert!(message.contains("field `r`"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        fs::write(&path, "{\n  \"n\": 2,\n  \"r\": oops\n}").unwrap();
        match load_market(&path).unwrap_err() {
            DataError::Parse { message, .. } => assert!(message.contains("line 3"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_psd_file_fails_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        fs::write(&path, r#"{"n": 2, "r": [[1, 2], [2, 1]], "c": [1, 0], "p": [0, 1]}"#).unwrap();
        assert!(matches!(
            load_market(&path).unwrap_err(),
            DataError::Validation(MarketError::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn estimate_examples() {
        let table = ReturnsTable {
            assets: vec!["A".into(), "B".into()],
            rows: vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            prices: vec![1.0, 1.0],
        };
        let spec = estimate_market(&table).unwrap();
        assert_eq!(spec.p.as_slice(), &[2.0, 3.0]);
        assert_eq!(spec.r_rows(), vec![vec![2.0, 2.0], vec![2.0, 2.0]]);
        assert_eq!(spec.c.as_slice(), &[1.0, 1.0]);

        let constant = ReturnsTable { rows: vec![vec![5.0, -1.0]; 4], ..table.clone() };
        let spec = estimate_market(&constant).unwrap();
        assert_eq!(spec.p.as_slice(), &[5.0, -1.0]);
        assert!(spec.r.iter().all(|&x| x == 0.0));

        let single = ReturnsTable { rows: vec![vec![1.0, 2.0]], ..table };
        assert!(matches!(estimate_market(&single), Err(DataError::InsufficientData { rows: 1 })));
    }

    #[test]
    fn returns_csv_rejects_missing_cells() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        fs::write(&path, "A,B\n1,2\n3,\n").unwrap();
        match read_returns_csv(&path).unwrap_err() {
            DataError::Parse { message, .. } => assert!(message.contains("line 3"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn prices_with_or_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let assets = vec!["A".to_string(), "B".to_string()];
        let bare = dir.path().join("p1.csv");
        fs::write(&bare, "10,20\n").unwrap();
        assert_eq!(read_prices_csv(&bare, &assets).unwrap(), vec![10.0, 20.0]);
        let headed = dir.path().join("p2.csv");
        fs::write(&headed, "A,B\n10,20\n").unwrap();
        assert_eq!(read_prices_csv(&headed, &assets).unwrap(), vec![10.0, 20.0]);
        let wrong = dir.path().join("p3.csv");
        fs::write(&wrong, "B,A\n10,20\n").unwrap();
        assert!(read_prices_csv(&wrong, &assets).is_err());
    }
}
