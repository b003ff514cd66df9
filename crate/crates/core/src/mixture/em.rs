use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{GaussianComponent, MixtureModel, PreparedGaussian, SegmentKind};
use crate::error::{Error, Result};
use crate::kmeans::kmeans;
use crate::linalg::{log_sum_exp, symmetrize};
use crate::rng::Rng;

const INIT_RESTARTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmOptions {
    pub max_iter: usize,
    /// Relative log-likelihood improvement below which iteration stops.
    pub tol: f64,
    /// Diagonal covariance regularization per row of data. Each M-step
    /// adds `reg * m / K` to the diagonal of a component's weighted scatter
    /// before dividing by its responsibility mass, the MAP update under a
    /// `exp(-λ tr(Σ⁻¹) / 2)` prior. `None` uses `1e-6` times the mean
    /// per-column variance of the data.
    pub reg: Option<f64>,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            max_iter: 200,
            tol: 1e-6,
            reg: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmFit {
    pub model: MixtureModel,
    /// Dense component covariances as fitted (before any compression).
    pub covariances: Vec<DMatrix<f64>>,
    /// `m × K` posterior component probabilities.
    pub responsibilities: DMatrix<f64>,
    /// Argmax of each responsibility row (lowest index on ties).
    pub labels: Vec<usize>,
    /// Objective after each E-step: data log-likelihood plus the
    /// regularization prior `-λ/2 Σ_k tr(Σ_k⁻¹)`. Non-decreasing.
    pub log_likelihood: Vec<f64>,
    pub converged: bool,
}

impl EmFit {
    pub fn final_log_likelihood(&self) -> f64 {
        *self.log_likelihood.last().unwrap_or(&f64::NEG_INFINITY)
    }
}

struct Params {
    weights: Vec<f64>,
    means: Vec<DVector<f64>>,
    covs: Vec<DMatrix<f64>>,
}

/// Full-covariance EM for a `k`-component mixture over the rows of `data`,
/// initialized from k-means++ / Lloyd hard assignments.
pub fn em_fit(
    data: &DMatrix<f64>,
    k: usize,
    segment_kind: SegmentKind,
    opts: &EmOptions,
    rng: &mut Rng,
) -> Result<EmFit> {
    let (m, n) = data.shape();
    if k == 0 || n == 0 {
        return Err(Error::invalid("EM needs k >= 1 and at least one column"));
    }
    if k > m {
        return Err(Error::invalid(format!("EM with k = {k} > {m} rows")));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("EM data contains non-finite values"));
    }
    let reg = opts.reg.unwrap_or_else(|| {
        let mean_var = column_variances(data).iter().sum::<f64>() / n as f64;
        if mean_var > 0.0 {
            1e-6 * mean_var
        } else {
            1e-10
        }
    });

    let km = kmeans(data, k, INIT_RESTARTS, rng)?;
    if km.k() < k {
        return Err(Error::invalid(format!(
            "data supports only {} distinct clusters, {k} requested",
            km.k()
        )));
    }
    let mut resp = DMatrix::zeros(m, k);
    for (i, &l) in km.labels.iter().enumerate() {
        resp[(i, l)] = 1.0;
    }
    let xt = data.transpose();
    let lambda = reg * m as f64 / k as f64;
    let mut params = m_step(data, &resp, lambda, None);

    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..opts.max_iter.max(1) {
        let ll = e_step(&xt, &params, lambda, &mut resp)?;
        let stop = trace
            .last()
            .is_some_and(|&prev: &f64| ll - prev < opts.tol * prev.abs());
        trace.push(ll);
        if stop {
            converged = true;
            break;
        }
        params = m_step(data, &resp, lambda, Some(&params));
    }
    if !converged {
        trace.push(e_step(&xt, &params, lambda, &mut resp)?);
    }

    let labels = (0..m)
        .map(|i| {
            let mut best = 0;
            for j in 1..k {
                if resp[(i, j)] > resp[(i, best)] {
                    best = j;
                }
            }
            best
        })
        .collect();
    let total: f64 = params.weights.iter().sum();
    let components = (0..k)
        .map(|j| GaussianComponent::from_covariance(params.weights[j] / total, params.means[j].clone(), &params.covs[j]))
        .collect();
    let model = MixtureModel {
        components,
        dimension: n,
        segment_kind,
    };
    Ok(EmFit {
        model,
        covariances: params.covs,
        responsibilities: resp,
        labels,
        log_likelihood: trace,
        converged,
    })
}

fn column_variances(data: &DMatrix<f64>) -> Vec<f64> {
    let m = data.nrows() as f64;
    data.column_iter()
        .map(|c| {
            let mean = c.sum() / m;
            c.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m
        })
        .collect()
}

/// Fills `resp` and returns the penalized log-likelihood.
fn e_step(xt: &DMatrix<f64>, p: &Params, lambda: f64, resp: &mut DMatrix<f64>) -> Result<f64> {
    let k = p.weights.len();
    let m = xt.ncols();
    let mut logp = DMatrix::zeros(m, k);
    let mut penalty = 0.0;
    for j in 0..k {
        let g = PreparedGaussian::from_dense(p.means[j].clone(), &p.covs[j])?;
        if lambda > 0.0 {
            let tr = g.precision_trace().ok_or_else(|| Error::numerical("EM: singular covariance"))?;
            penalty += 0.5 * lambda * tr;
        }
        let lw = p.weights[j].ln();
        for (i, v) in g.log_pdf_columns(xt).into_iter().enumerate() {
            logp[(i, j)] = v + lw;
        }
    }
    let mut ll = 0.0;
    let mut row = vec![0.0; k];
    for i in 0..m {
        for j in 0..k {
            row[j] = logp[(i, j)];
        }
        let norm = log_sum_exp(&row);
        if !norm.is_finite() {
            return Err(Error::numerical("EM: a data point has zero density under every component"));
        }
        ll += norm;
        for j in 0..k {
            resp[(i, j)] = (row[j] - norm).exp();
        }
    }
    Ok(ll - penalty)
}

fn m_step(data: &DMatrix<f64>, resp: &DMatrix<f64>, lambda: f64, prev: Option<&Params>) -> Params {
    let (m, n) = data.shape();
    let k = resp.ncols();
    let mut weights = Vec::with_capacity(k);
    let mut means = Vec::with_capacity(k);
    let mut covs = Vec::with_capacity(k);
    for j in 0..k {
        let r = resp.column(j);
        let nk: f64 = r.sum();
        if nk < 1e-10 * m as f64 {
            // starved component: keep its shape, let its weight vanish
            if let Some(p) = prev {
                weights.push(nk.max(f64::MIN_POSITIVE) / m as f64);
                means.push(p.means[j].clone());
                covs.push(p.covs[j].clone());
                continue;
            }
        }
        let mean = data.tr_mul(&r) / nk;
        let mut centered = data.clone();
        for (i, mut row) in centered.row_iter_mut().enumerate() {
            row -= mean.transpose();
            row *= r[i].sqrt();
        }
        let mut cov = centered.tr_mul(&centered);
        for d in 0..n {
            cov[(d, d)] += lambda;
        }
        cov /= nk;
        weights.push(nk / m as f64);
        means.push(mean);
        covs.push(symmetrize(&cov));
    }
    Params { weights, means, covs }
}
