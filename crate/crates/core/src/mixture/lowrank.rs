use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mean_and_cov, select_rows, sym_eigen_desc, LN_2PI};
use crate::rng::Rng;

/// Best rank-`k` approximation `Q_k Λ_k Q_kᵀ` of a symmetric PSD matrix,
/// returned as the `n × k` factor `Q_k Λ_k^{1/2}` (negative eigenvalues
/// clipped to zero).
pub fn low_rank_approx(cov: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let n = cov.nrows();
    if cov.ncols() != n {
        return Err(Error::invalid("covariance must be square"));
    }
    if k > n {
        return Err(Error::invalid(format!("rank {k} exceeds dimension {n}")));
    }
    let scale = cov.amax().max(1.0);
    if (cov - cov.transpose()).amax() > 1e-9 * scale {
        return Err(Error::invalid("covariance is not symmetric"));
    }
    let (values, vectors) = sym_eigen_desc(cov);
    let mut f = DMatrix::zeros(n, k);
    for j in 0..k {
        f.set_column(j, &(vectors.column(j) * values[j].max(0.0).sqrt()));
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpcaFit {
    pub mean: DVector<f64>,
    /// `n × k` loading matrix.
    pub w: DMatrix<f64>,
    pub noise_var: f64,
    /// Log-likelihood of the training data under `N(μ, W Wᵀ + σ² I)`.
    pub log_likelihood: f64,
}

/// Closed-form PPCA from a covariance: `σ²` is the mean of the `n - k`
/// smallest eigenvalues and `W = U_k (Λ_k - σ² I)^{1/2}`.
pub fn ppca_from_covariance(cov: &DMatrix<f64>, k: usize) -> Result<(DMatrix<f64>, f64)> {
    let n = cov.nrows();
    if k >= n {
        return Err(Error::invalid(format!("PPCA rank {k} must be below dimension {n}")));
    }
    let (values, vectors) = sym_eigen_desc(cov);
    let noise_var = (values.iter().skip(k).sum::<f64>() / (n - k) as f64).max(0.0);
    let mut w = DMatrix::zeros(n, k);
    for j in 0..k {
        w.set_column(j, &(vectors.column(j) * (values[j] - noise_var).max(0.0).sqrt()));
    }
    Ok((w, noise_var))
}

/// Fit PPCA with `k` latent dimensions to the rows of `data`.
pub fn ppca_fit(data: &DMatrix<f64>, k: usize) -> Result<PpcaFit> {
    let (m, n) = data.shape();
    if k == 0 || k >= n {
        return Err(Error::invalid(format!("PPCA rank {k} must be in 1..{n}")));
    }
    if m <= k {
        return Err(Error::invalid(format!("PPCA rank {k} needs more than {k} rows")));
    }
    let (mean, cov) = mean_and_cov(data);
    let (w, noise_var) = ppca_from_covariance(&cov, k)?;
    let (values, _) = sym_eigen_desc(&cov);
    let log_likelihood = ppca_log_likelihood(values.as_slice(), k, m);
    Ok(PpcaFit {
        mean,
        w,
        noise_var,
        log_likelihood,
    })
}

/// Maximized PPCA log-likelihood of `m` samples whose covariance has the
/// given (descending) eigenvalues.
pub fn ppca_log_likelihood(eigenvalues: &[f64], k: usize, m: usize) -> f64 {
    let n = eigenvalues.len();
    let s2 = noise_floor(eigenvalues, k);
    let logdet: f64 = eigenvalues[..k].iter().map(|v| v.max(s2).ln()).sum::<f64>() + (n - k) as f64 * s2.ln();
    -0.5 * m as f64 * (n as f64 * LN_2PI + logdet + n as f64)
}

fn noise_floor(eigenvalues: &[f64], k: usize) -> f64 {
    let n = eigenvalues.len();
    let s2 = eigenvalues[k..].iter().sum::<f64>() / (n - k) as f64;
    s2.max(eigenvalues[0].abs() * 1e-12).max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSelection {
    pub best: usize,
    /// Held-out log-likelihood per grid value, in grid order.
    pub curve: Vec<(usize, f64)>,
}

/// Choose the PPCA rank that maximizes held-out log-likelihood on a seeded
/// 80/20 split. Ties go to the earliest grid entry.
pub fn select_rank(data: &DMatrix<f64>, k_grid: &[usize], rng: &mut Rng) -> Result<RankSelection> {
    let (m, n) = data.shape();
    if k_grid.is_empty() {
        return Err(Error::invalid("rank grid is empty"));
    }
    if let Some(&bad) = k_grid.iter().find(|&&k| k == 0 || k >= n) {
        return Err(Error::invalid(format!("rank {bad} must be in 1..{n}")));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let n_train = (m as f64 * 0.8).round() as usize;
    if n_train < 2 || n_train >= m {
        return Err(Error::invalid(format!("cannot split {m} rows into train and held-out sets")));
    }
    let mut train_idx = order[..n_train].to_vec();
    let mut test_idx = order[n_train..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let train = select_rows(data, &train_idx);
    let test = select_rows(data, &test_idx);

    let (mean, cov) = mean_and_cov(&train);
    let (values, vectors) = sym_eigen_desc(&cov);
    let mut centered = test.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let m_test = test.nrows() as f64;
    // projected held-out scatter along each training eigenvector
    let proj = &centered * &vectors;
    let p: Vec<f64> = proj.column_iter().map(|c| c.norm_squared() / m_test).collect();
    let total: f64 = centered.iter().map(|v| v * v).sum::<f64>() / m_test;

    let vals = values.as_slice();
    let curve: Vec<(usize, f64)> = k_grid
        .iter()
        .map(|&k| {
            let s2 = noise_floor(vals, k);
            let mut logdet = (n - k) as f64 * s2.ln();
            let mut trace = 0.0;
            let mut explained = 0.0;
            for i in 0..k {
                let lam = vals[i].max(s2);
                logdet += lam.ln();
                trace += p[i] / lam;
                explained += p[i];
            }
            trace += (total - explained).max(0.0) / s2;
            (k, -0.5 * m_test * (n as f64 * LN_2PI + logdet + trace))
        })
        .collect();
    let mut best = 0;
    for (i, c) in curve.iter().enumerate() {
        if c.1 > curve[best].1 {
            best = i;
        }
    }
    Ok(RankSelection {
        best: curve[best].0,
        curve,
    })
}
