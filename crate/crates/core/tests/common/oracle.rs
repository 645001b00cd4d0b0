//! Reference computations that share no code with the library.

use nalgebra::{DMatrix, DVector};

/// Pseudo-inverse of a symmetric matrix through its eigendecomposition,
/// dropping eigenvalues below `rel_tol · max |λ|`.
pub fn sym_pinv(h: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let e = h.clone().symmetric_eigen();
    let max = e.eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let inv = e.eigenvalues.map(|l| if l.abs() > rel_tol * max { 1.0 / l } else { 0.0 });
    &e.eigenvectors * DMatrix::from_diagonal(&inv) * e.eigenvectors.transpose()
}

/// Minimizes `vᵀ r v` subject to `c·v = cost`, `p·v = payoff` by eliminating
/// variables: the constraints are solved for the pair of coordinates with the
/// best-conditioned 2×2 block, leaving `v = v₀ + N z` over the free
/// coordinates, and the reduced quadratic is minimized through its normal
/// equations. Returns the minimal risk, or `None` when the constraints are
/// inconsistent.
pub fn min_risk(
    r: &DMatrix<f64>,
    c: &DVector<f64>,
    p: &DVector<f64>,
    cost: f64,
    payoff: f64,
) -> Option<f64> {
    let n = r.nrows();
    let a = DMatrix::from_rows(&[c.transpose(), p.transpose()]);
    let b = DVector::from_vec(vec![cost, payoff]);
    let scale = a.amax().max(f64::MIN_POSITIVE);
    // pivot pair with the largest |det|; a single pivot when c ∥ p
    let mut best: Option<(f64, usize, usize)> = None;
    for j in 0..n {
        for l in (j + 1)..n {
            let det = (a[(0, j)] * a[(1, l)] - a[(0, l)] * a[(1, j)]).abs();
            if best.is_none_or(|(d, _, _)| det > d) {
                best = Some((det, j, l));
            }
        }
    }
    let (v0, nb) = match best {
        Some((det, j, l)) if det > 1e-10 * scale * scale => {
            let ab = DMatrix::from_columns(&[a.column(j), a.column(l)]);
            let inv = ab.try_inverse()?;
            let free: Vec<usize> = (0..n).filter(|&x| x != j && x != l).collect();
            let mut v0 = DVector::zeros(n);
            let head = &inv * &b;
            v0[j] = head[0];
            v0[l] = head[1];
            let mut nb = DMatrix::zeros(n, free.len());
            for (col, &f) in free.iter().enumerate() {
                let shift = -(&inv * a.column(f));
                nb[(j, col)] = shift[0];
                nb[(l, col)] = shift[1];
                nb[(f, col)] = 1.0;
            }
            (v0, nb)
        }
        _ => {
            // rank ≤ 1: keep the row with the larger entry and check the other
            let (row, other) = if c.amax() >= p.amax() { (0, 1) } else { (1, 0) };
            let j = a.row(row).transpose().iamax();
            let pivot = a[(row, j)];
            if pivot.abs() <= f64::MIN_POSITIVE {
                return (b.amax() == 0.0).then_some(0.0);
            }
            let ratio = a[(other, j)] / pivot;
            if (b[other] - ratio * b[row]).abs() > 1e-9 * b.amax().max(1.0) {
                return None;
            }
            let mut v0 = DVector::zeros(n);
            v0[j] = b[row] / pivot;
            let free: Vec<usize> = (0..n).filter(|&x| x != j).collect();
            let mut nb = DMatrix::zeros(n, free.len());
            for (col, &f) in free.iter().enumerate() {
                nb[(j, col)] = -a[(row, f)] / pivot;
                nb[(f, col)] = 1.0;
            }
            (v0, nb)
        }
    };
    let v = if nb.ncols() == 0 {
        v0
    } else {
        let h = nb.transpose() * r * &nb;
        let rhs = -(nb.transpose() * r * &v0);
        &v0 + &nb * (sym_pinv(&h, 1e-12) * rhs)
    };
    Some(v.dot(&(r * &v)).max(0.0).sqrt())
}

/// Exhaustive arbitrage search over a kernel basis `z` of `r`: every
/// combination of one or two basis vectors that costs nothing is tried for
/// nonzero payoff. These combinations span `ker r ∩ ker c`, so the search is
/// complete.
pub fn has_arbitrage(z: &DMatrix<f64>, c: &DVector<f64>, p: &DVector<f64>, tol: f64) -> bool {
    let d = z.ncols();
    let cz: Vec<f64> = (0..d).map(|j| c.dot(&z.column(j))).collect();
    let scale = c.norm().max(p.norm()).max(1.0);
    let costless = |v: &DVector<f64>| c.dot(v).abs() <= tol * scale * v.norm().max(1.0);
    let pays = |v: &DVector<f64>| p.dot(v).abs() > tol * scale * v.norm().max(1.0);
    for a in 0..d {
        let za = z.column(a).clone_owned();
        if costless(&za) && pays(&za) {
            return true;
        }
        for b in (a + 1)..d {
            let v = &za * cz[b] - z.column(b) * cz[a];
            if v.norm() > tol && costless(&v) && pays(&(&v / v.norm())) {
                return true;
            }
        }
    }
    false
}

/// Kernel basis of a PSD matrix: eigenvectors with eigenvalue at most
/// `rel_tol · max(1, λmax)`, computed through the SVD.
pub fn kernel(r: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let svd = r.clone().svd(true, false);
    let u = svd.u.unwrap();
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cols: Vec<DVector<f64>> = (0..r.ncols())
        .filter(|&j| svd.singular_values[j] <= rel_tol * max.max(1.0))
        .map(|j| u.column(j).clone_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(r.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Residual of projecting `v` onto the span of `funds`, relative to `‖v‖`.
pub fn span_residual(v: &DVector<f64>, funds: &[DVector<f64>]) -> f64 {
    if funds.is_empty() {
        return v.norm();
    }
    let f = DMatrix::from_columns(funds);
    let coef = sym_pinv(&(f.transpose() * &f), 1e-14) * f.transpose() * v;
    (v - f * coef).norm() / v.norm().max(1.0)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
