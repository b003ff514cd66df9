//! Small dense linear-algebra helpers shared by the mixture and scene code.
//! No explicit inverses: every solve goes through a Cholesky factor.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted in
/// decreasing order; eigenvectors are the matching columns.
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let sym = symmetrize(m);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Cholesky factorization, adding diagonal jitter that escalates from
/// `1e-10` to `1e-6` times the mean diagonal when the plain factorization
/// fails. Returns the factor and the jitter that was used.
pub fn cholesky_jitter(m: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return Ok((ch, 0.0));
    }
    let n = m.nrows().max(1);
    let scale = (m.trace() / n as f64).abs().max(f64::MIN_POSITIVE);
    let mut jitter = 1e-10 * scale;
    while jitter <= 1e-6 * scale * (1.0 + 1e-9) {
        let mut shifted = m.clone();
        for i in 0..m.nrows() {
            shifted[(i, i)] += jitter;
        }
        if let Some(ch) = Cholesky::new(shifted) {
            return Ok((ch, jitter));
        }
        jitter *= 10.0;
    }
    Err(Error::numerical(format!(
        "matrix of order {} is not positive definite after maximum jitter",
        m.nrows()
    )))
}

/// `log det` of the matrix factored by `ch`.
pub fn chol_logdet(ch: &Cholesky<f64, Dyn>) -> f64 {
    let l = ch.l_dirty();
    (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0
}

/// A factor `F` with `F Fᵀ` equal to the PSD projection of `m`
/// (eigenvalues clipped at zero). Columns with zero eigenvalue are dropped.
pub fn psd_factor(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (values, vectors) = sym_eigen_desc(m);
    let keep = values.iter().take_while(|&&v| v > 0.0).count();
    let mut f = DMatrix::zeros(m.nrows(), keep);
    for j in 0..keep {
        let s = values[j].sqrt();
        f.set_column(j, &(vectors.column(j) * s));
    }
    f
}

/// Nearest PSD matrix in Frobenius norm: clip negative eigenvalues and
/// re-symmetrize.
pub fn repair_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let f = psd_factor(m);
    symmetrize(&(&f * f.transpose()))
}

/// Row-wise sample mean and maximum-likelihood covariance (divisor m).
pub fn mean_and_cov(data: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let m = data.nrows();
    let mean = data.row_mean().transpose();
    let mut centered = data.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let cov = centered.tr_mul(&centered) / m as f64;
    (mean, symmetrize(&cov))
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Extract the sub-matrix at the given row and column indices.
pub fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

pub fn select_vec(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}
