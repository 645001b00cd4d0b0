//! Seeded random markets for the property and acceptance suites.

use markowitz::{CanonicalCase, Invariants, Market, MarketSpec, ToleranceConfig};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn vector(rng: &mut StdRng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-scale..scale))
}

pub fn orthogonal(rng: &mut StdRng, n: usize) -> DMatrix<f64> {
    loop {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let qr = a.qr();
        if qr.r().diagonal().iter().all(|d: &f64| d.abs() > 1e-3) {
            return qr.q();
        }
    }
}

/// `U diag(s) Vᵀ` with singular values log-uniform in `[1/√cond, √cond]`.
pub fn invertible(rng: &mut StdRng, n: usize, cond: f64) -> DMatrix<f64> {
    let u = orthogonal(rng, n);
    let v = orthogonal(rng, n);
    let half = cond.sqrt().ln();
    let mut s: Vec<f64> = (0..n).map(|_| rng.random_range(-half..=half).exp()).collect();
    if n >= 2 {
        // pin the extremes so the condition number is exactly `cond`
        s[0] = half.exp();
        s[1] = (-half).exp();
    }
    u * DMatrix::from_diagonal(&DVector::from_vec(s)) * v.transpose()
}

pub fn condition(t: &DMatrix<f64>) -> f64 {
    let sv = t.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

pub fn random_invariants(rng: &mut StdRng, n: usize, case: CanonicalCase) -> Invariants {
    let g = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.1..3.0) };
    let i = rng.random_range(-2.0..2.0);
    let m = rng.random_range(0.1..3.0);
    match case {
        CanonicalCase::RisklessWithCost => {
            let k = rng.random_range(0..n);
            let g = if k == 0 { 0.0 } else { g };
            Invariants::new(case, n, k, 0.0, g, i).unwrap()
        }
        CanonicalCase::NoCostlyRiskless => {
            let k = rng.random_range(1..=n);
            Invariants::new(case, n, k, m, g, i).unwrap()
        }
        CanonicalCase::ZeroCost => {
            let k = rng.random_range(1..=n);
            Invariants::new(case, n, k, 0.0, g, 0.0).unwrap()
        }
    }
}

pub const CASES: [CanonicalCase; 3] = [
    CanonicalCase::RisklessWithCost,
    CanonicalCase::NoCostlyRiskless,
    CanonicalCase::ZeroCost,
];

/// `(Bᵀ r B, Bᵀ c, Bᵀ p)`: the market seen in coordinates `x = B y`, i.e. the
/// pushforward along `B⁻¹`.
pub fn pull_back(spec: &MarketSpec, b: &DMatrix<f64>) -> MarketSpec {
    let r = b.transpose() * &spec.r * b;
    let r = (&r + r.transpose()) * 0.5;
    MarketSpec::new(r, b.transpose() * &spec.c, b.transpose() * &spec.p)
}

pub fn market(spec: MarketSpec) -> Market {
    Market::validate(spec, ToleranceConfig::default()).unwrap()
}

/// `Q diag(λ) Qᵀ` with `rank` eigenvalues in `[lo, hi]` and the rest zero.
pub fn covariance(rng: &mut StdRng, n: usize, rank: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let q = orthogonal(rng, n);
    let d = DVector::from_fn(n, |j, _| if j < rank { rng.random_range(lo..hi) } else { 0.0 });
    let r = &q * DMatrix::from_diagonal(&d) * q.transpose();
    (&r + r.transpose()) * 0.5
}

/// A generic nondegenerate market: full-rank `r` (no riskless portfolio) or
/// `r` of rank `n − 1` with `c` bounded away from zero on its kernel.
pub fn nondegenerate(rng: &mut StdRng, n: usize) -> MarketSpec {
    let rank = if n >= 2 && rng.random_bool(0.5) { n - 1 } else { n };
    let q = orthogonal(rng, n);
    let d = DVector::from_fn(n, |j, _| if j < rank { rng.random_range(0.2..5.0) } else { 0.0 });
    let r = &q * DMatrix::from_diagonal(&d) * q.transpose();
    let r = (&r + r.transpose()) * 0.5;
    let mut c = vector(rng, n, 1.0);
    if rank < n {
        let kernel = q.column(n - 1);
        let along = kernel.dot(&c);
        let floor = 0.2 * c.norm();
        if along.abs() < floor {
            c += kernel * (floor.copysign(along) - along);
        }
    }
    MarketSpec::new(r, c, vector(rng, n, 2.0))
}
