//! Small dense helpers on top of nalgebra used by the classifier.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{MarketError, Result};

/// Eigen-decomposition of a symmetric matrix with eigenvalues in ascending order.
pub(crate) struct SortedEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SortedEigen {
    pub fn new(sym: &DMatrix<f64>) -> Self {
        let n = sym.nrows();
        let eig = SymmetricEigen::new(sym.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_iterator(n, order.iter().map(|&j| eig.eigenvalues[j]));
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            let mut col = eig.eigenvectors.column(src).clone_owned();
            orient(&mut col);
            vectors.set_column(dst, &col);
        }
        Self { values, vectors }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Flip `v` so its largest-magnitude entry is positive.
pub(crate) fn orient(v: &mut DVector<f64>) {
    if let Some((idx, _)) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
    {
        if v[idx] < 0.0 {
            v.neg_mut();
        }
    }
}

/// Symmetric orthogonal `H` with `H a = |a| e_1`; identity when `a` is zero or
/// already a non-negative multiple of `e_1`.
pub(crate) fn align_to_first_axis(a: &DVector<f64>, zero_tol: f64) -> DMatrix<f64> {
    let k = a.len();
    let norm = a.norm();
    let mut w = a.clone();
    if k == 0 || norm <= zero_tol {
        return DMatrix::identity(k, k);
    }
    w[0] -= norm;
    let ww = w.norm_squared();
    if ww <= (f64::EPSILON * norm).powi(2) {
        return DMatrix::identity(k, k);
    }
    DMatrix::identity(k, k) - (&w * w.transpose()) * (2.0 / ww)
}

/// Orthonormal basis (as columns, `d × (d-1)`) of the orthogonal complement of
/// a nonzero vector `a` in `R^d`.
pub(crate) fn complement_of(a: &DVector<f64>) -> DMatrix<f64> {
    let d = a.len();
    let h = align_to_first_axis(a, 0.0);
    h.columns(1, d.saturating_sub(1)).clone_owned()
}

/// Two-pass classical Gram-Schmidt under the form `x^T form y`.
///
/// Each column is orthogonalized twice against the already accepted columns.
/// A column whose squared form-norm shrinks to `pivot_tol` times its value
/// before orthogonalization is rejected as `IllConditioned`.
pub(crate) fn gram_schmidt_form(
    form: &DMatrix<f64>,
    vectors: &DMatrix<f64>,
    pivot_tol: f64,
) -> Result<DMatrix<f64>> {
    let n = vectors.nrows();
    let k = vectors.ncols();
    let mut out = DMatrix::<f64>::zeros(n, k);
    for j in 0..k {
        let mut w = vectors.column(j).clone_owned();
        let sq0 = w.dot(&(form * &w));
        for _pass in 0..2 {
            if j == 0 {
                break;
            }
            let accepted = out.columns(0, j);
            let coeffs = accepted.transpose() * (form * &w);
            w -= accepted * coeffs;
        }
        let sq = w.dot(&(form * &w));
        if !(sq0 > 0.0) || sq <= pivot_tol * sq0 {
            return Err(MarketError::IllConditioned(format!(
                "column {j} has form-norm^2 {sq:e}"
            )));
        }
        out.set_column(j, &(w / sq.sqrt()));
    }
    Ok(out)
}

/// Whether the columns of `m` are independent: `σ_min > tol · σ_max`.
pub(crate) fn columns_independent(m: &DMatrix<f64>, tol: f64) -> bool {
    if m.ncols() == 0 {
        return true;
    }
    if m.ncols() > m.nrows() {
        return false;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    max > 0.0 && min > tol * max
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub(crate) fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}
