//! Numerical thresholds shared by every rank, sign and equality decision.
//!
//! All thresholds are dimensionless and applied relative to a scale taken from
//! the data (`max(1, λ_max)` for eigenvalue cutoffs, `max(1, |x|, |y|)` for
//! scalar comparisons).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Largest accepted asymmetry `|r[a][b] - r[b][a]|`, relative to `max(1, max|r|)`.
    pub tol_sym: f64,
    /// Most negative accepted eigenvalue, relative to `max(1, λ_max)`.
    pub tol_psd: f64,
    /// Eigenvalue / singular value cutoff for rank decisions.
    pub tol_rank: f64,
    /// Equality threshold for morphism probes and for deciding that a
    /// functional vanishes on a subspace.
    pub tol_match: f64,
    /// Largest accepted deviation of a canonicalized market from its model.
    pub tol_canon: f64,
    /// Relative threshold for comparing invariants in isomorphism decisions.
    pub tol_iso: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            tol_sym: 1e-8,
            tol_psd: 1e-9,
            tol_rank: 1e-9,
            tol_match: 1e-7,
            tol_canon: 1e-8,
            tol_iso: 1e-7,
        }
    }
}

impl ToleranceConfig {
    pub fn with_iso(mut self, tol_iso: f64) -> Self {
        self.tol_iso = tol_iso;
        self
    }
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Relative difference with the same unit floor as [`rel_close`].
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}
