use nalgebra::{DMatrix, DVector};

use super::{GaussianComponent, MixtureModel, PreparedGaussian, SegmentKind};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_jitter, log_sum_exp, psd_factor, select_rows, select_vec};

/// Condition a mixture on `x[observed] = values`; the result is a mixture
/// over the remaining coordinates in increasing index order.
pub fn condition(model: &MixtureModel, observed: &[usize], values: &[f64]) -> Result<MixtureModel> {
    Conditioner::new(model, observed)?.condition(values)
}

/// Conditioning on a fixed set of observed coordinates, with everything
/// that does not depend on the observed values precomputed.
///
/// Each component stays in factored form: with `F` split into observed rows
/// `F_a` and free rows `F_b`, the conditional covariance is
/// `F_b C F_bᵀ + σ² I` with `C = I - F_aᵀ Σ_aa⁻¹ F_a`, and the conditional
/// mean is `μ_b + F_b F_aᵀ Σ_aa⁻¹ (x_a - μ_a)`.
pub struct Conditioner {
    observed: Vec<usize>,
    free: Vec<usize>,
    parts: Vec<Part>,
    segment_kind: SegmentKind,
}

struct Part {
    log_weight: f64,
    mu_a: DVector<f64>,
    mu_b: DVector<f64>,
    /// `F_b F_aᵀ Σ_aa⁻¹`.
    gain: DMatrix<f64>,
    marginal: PreparedGaussian,
    factor: DMatrix<f64>,
    noise_var: f64,
}

impl Conditioner {
    pub fn new(model: &MixtureModel, observed: &[usize]) -> Result<Self> {
        Self::with_observation_noise(model, observed, 0.0)
    }

    /// Condition on observations `y = x[observed] + e` with
    /// `e ~ N(0, obs_var I)`: `Σ_aa` gains `obs_var` on its diagonal in the
    /// gain, the conditional covariance and the component weights.
    pub fn with_observation_noise(model: &MixtureModel, observed: &[usize], obs_var: f64) -> Result<Self> {
        if !(obs_var >= 0.0 && obs_var.is_finite()) {
            return Err(Error::invalid(format!("observation variance {obs_var} must be finite and non-negative")));
        }
        let n = model.dimension;
        let mut is_obs = vec![false; n];
        for &i in observed {
            if i >= n || is_obs[i] {
                return Err(Error::invalid(format!("invalid or repeated observed index {i}")));
            }
            is_obs[i] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&i| !is_obs[i]).collect();
        if free.is_empty() {
            return Err(Error::invalid("conditioning leaves no free coordinates"));
        }
        let parts = model
            .components
            .iter()
            .map(|c| {
                let fa = select_rows(&c.cov_factor, observed);
                let fb = select_rows(&c.cov_factor, &free);
                let mut saa = &fa * fa.transpose();
                for i in 0..saa.nrows() {
                    saa[(i, i)] += c.noise_var + obs_var;
                }
                let (ch, _) = cholesky_jitter(&saa)?;
                let beta = ch.solve(&fa);
                let gain = &fb * beta.transpose();
                let k = c.rank();
                let inner = DMatrix::identity(k, k) - fa.transpose() * &beta;
                let mu_a = select_vec(&c.mean, observed);
                Ok(Part {
                    log_weight: if c.weight > 0.0 { c.weight.ln() } else { f64::NEG_INFINITY },
                    marginal: PreparedGaussian::from_dense(mu_a.clone(), &saa)?,
                    mu_a,
                    mu_b: select_vec(&c.mean, &free),
                    gain,
                    factor: &fb * psd_factor(&inner),
                    noise_var: c.noise_var,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Conditioner {
            observed: observed.to_vec(),
            free,
            parts,
            segment_kind: model.segment_kind,
        })
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn condition(&self, values: &[f64]) -> Result<MixtureModel> {
        if values.len() != self.observed.len() {
            return Err(Error::Dimension {
                expected: self.observed.len(),
                got: values.len(),
            });
        }
        let xa = DVector::from_column_slice(values);
        let live = self.parts.iter().filter(|p| p.log_weight.is_finite()).count();
        let log_w: Vec<f64> = if live == 1 {
            // a lone component keeps all the mass, even where its marginal
            // density underflows
            self.parts.iter().map(|p| if p.log_weight.is_finite() { 0.0 } else { f64::NEG_INFINITY }).collect()
        } else {
            self.parts.iter().map(|p| p.log_weight + p.marginal.log_pdf(&xa)).collect()
        };
        let norm = log_sum_exp(&log_w);
        if !norm.is_finite() {
            return Err(Error::numerical("observed values have zero density under every component"));
        }
        let components = self
            .parts
            .iter()
            .zip(&log_w)
            .map(|(p, lw)| GaussianComponent {
                weight: (lw - norm).exp(),
                mean: &p.mu_b + &p.gain * (&xa - &p.mu_a),
                cov_factor: p.factor.clone(),
                noise_var: p.noise_var,
            })
            .collect();
        Ok(MixtureModel {
            components,
            dimension: self.free.len(),
            segment_kind: self.segment_kind,
        })
    }
}
