//! Gaussian mixtures with factored covariances: EM fitting, low-rank
//! compression, rank selection, conditioning and sampling.

mod condition;
mod em;
pub(crate) mod io;
mod lowrank;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use condition::{condition, Conditioner};
pub use em::{em_fit, EmFit, EmOptions};
pub use io::{model_from_json, model_to_json, read_model, write_model, MODEL_FORMAT};
pub use lowrank::{
    low_rank_approx, ppca_fit, ppca_from_covariance, ppca_log_likelihood, select_rank, PpcaFit,
    RankSelection,
};

use crate::error::{Error, Result};
use crate::linalg::{chol_logdet, cholesky_jitter, log_sum_exp, LN_2PI};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    FinalApproach,
    RadarVector,
    /// Full arrivals (radar vector followed by final approach).
    Arrival,
    Pairwise,
}

impl SegmentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SegmentKind::FinalApproach => "final_approach",
            SegmentKind::RadarVector => "radar_vector",
            SegmentKind::Arrival => "arrival",
            SegmentKind::Pairwise => "pairwise",
        }
    }
}

/// One mixture component with covariance `F Fᵀ + noise_var · I`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: DVector<f64>,
    /// `n × k` factor `F`.
    pub cov_factor: DMatrix<f64>,
    pub noise_var: f64,
}

impl GaussianComponent {
    /// Component with the PSD projection of a dense covariance, stored
    /// exactly (no isotropic part).
    pub fn from_covariance(weight: f64, mean: DVector<f64>, cov: &DMatrix<f64>) -> Self {
        GaussianComponent {
            weight,
            mean,
            cov_factor: crate::linalg::psd_factor(cov),
            noise_var: 0.0,
        }
    }

    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn rank(&self) -> usize {
        self.cov_factor.ncols()
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        let mut c = &self.cov_factor * self.cov_factor.transpose();
        for i in 0..c.nrows() {
            c[(i, i)] += self.noise_var;
        }
        crate::linalg::symmetrize(&c)
    }

    /// Draw from this component: `μ + F u + σ ε`.
    pub fn sample(&self, rng: &mut Rng) -> DVector<f64> {
        let k = self.cov_factor.ncols();
        let u = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut x = &self.mean + &self.cov_factor * u;
        if self.noise_var > 0.0 {
            let s = self.noise_var.sqrt();
            for v in x.iter_mut() {
                *v += s * rng.sample::<f64, _>(StandardNormal);
            }
        }
        x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    pub components: Vec<GaussianComponent>,
    pub dimension: usize,
    pub segment_kind: SegmentKind,
}

impl MixtureModel {
    pub fn new(components: Vec<GaussianComponent>, segment_kind: SegmentKind) -> Result<Self> {
        let dimension = components
            .first()
            .map(|c| c.dimension())
            .ok_or_else(|| Error::invalid("a mixture needs at least one component"))?;
        let model = MixtureModel {
            components,
            dimension,
            segment_kind,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let mut total = 0.0;
        for c in &self.components {
            if c.dimension() != self.dimension || c.cov_factor.nrows() != self.dimension {
                return Err(Error::Dimension {
                    expected: self.dimension,
                    got: c.dimension(),
                });
            }
            if !(0.0..=1.0).contains(&c.weight) || !(c.noise_var >= 0.0) {
                return Err(Error::invalid("component weight or noise variance out of range"));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-12 * self.components.len().max(1) as f64 {
            return Err(Error::invalid(format!("mixture weights sum to {total}")));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    /// Per-row `log p(x)` for the rows of `data`.
    pub fn log_densities(&self, data: &DMatrix<f64>) -> Result<Vec<f64>> {
        if data.ncols() != self.dimension {
            return Err(Error::Dimension {
                expected: self.dimension,
                got: data.ncols(),
            });
        }
        let xt = data.transpose();
        let per_comp: Vec<Vec<f64>> = self
            .components
            .iter()
            .map(|c| {
                let prepared = PreparedGaussian::from_component(c)?;
                let lw = c.weight.ln();
                Ok(prepared.log_pdf_columns(&xt).into_iter().map(|v| v + lw).collect())
            })
            .collect::<Result<_>>()?;
        Ok((0..data.nrows())
            .map(|i| {
                let terms: Vec<f64> = per_comp.iter().map(|c| c[i]).collect();
                log_sum_exp(&terms)
            })
            .collect())
    }

    /// `Σ_i log Σ_j π_j N(x_i | μ_j, Σ_j)`.
    pub fn log_likelihood(&self, data: &DMatrix<f64>) -> Result<f64> {
        Ok(self.log_densities(data)?.iter().sum())
    }

    /// Component index drawn from the mixture weights.
    pub fn sample_component(&self, rng: &mut Rng) -> usize {
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        let mut u = rng.random::<f64>() * total;
        let mut last = 0;
        for (j, c) in self.components.iter().enumerate() {
            if c.weight > 0.0 {
                last = j;
                if u < c.weight {
                    return j;
                }
                u -= c.weight;
            }
        }
        last
    }

    /// Draw one vector; also returns the component it came from.
    pub fn sample(&self, rng: &mut Rng) -> (DVector<f64>, usize) {
        let j = self.sample_component(rng);
        (self.components[j].sample(rng), j)
    }

    /// Replace every component covariance by its closed-form PPCA
    /// approximation at `rank`. A rank of at least `n` leaves the model
    /// unchanged.
    pub fn compressed(&self, rank: usize) -> Result<MixtureModel> {
        if rank >= self.dimension {
            return Ok(self.clone());
        }
        let components = self
            .components
            .iter()
            .map(|c| {
                let (w, noise_var) = ppca_from_covariance(&c.covariance(), rank)?;
                Ok(GaussianComponent {
                    weight: c.weight,
                    mean: c.mean.clone(),
                    cov_factor: w,
                    noise_var,
                })
            })
            .collect::<Result<_>>()?;
        Ok(MixtureModel {
            components,
            dimension: self.dimension,
            segment_kind: self.segment_kind,
        })
    }
}

/// Columns per parallel work unit in density evaluation.
const COLUMN_CHUNK: usize = 64;

/// A Gaussian prepared for repeated density evaluation.
pub(crate) struct PreparedGaussian {
    mean: DVector<f64>,
    log_norm: f64,
    kind: Precision,
}

enum Precision {
    /// Lower Cholesky factor of the full covariance.
    Dense(DMatrix<f64>),
    /// Woodbury form for `F Fᵀ + σ² I`: the factor, the lower Cholesky
    /// factor of `σ² I + Fᵀ F`, and `σ²`.
    Woodbury(DMatrix<f64>, DMatrix<f64>, f64),
}

impl PreparedGaussian {
    pub(crate) fn from_dense(mean: DVector<f64>, cov: &DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        let (ch, _) = cholesky_jitter(cov)?;
        let logdet = chol_logdet(&ch);
        Ok(PreparedGaussian {
            mean,
            log_norm: -0.5 * (n as f64 * LN_2PI + logdet),
            kind: Precision::Dense(ch.l()),
        })
    }

    /// `tr(Σ⁻¹)` for a dense covariance; `None` for the Woodbury form.
    pub(crate) fn precision_trace(&self) -> Option<f64> {
        match &self.kind {
            Precision::Dense(l) => {
                let n = l.nrows();
                let inv = l.solve_lower_triangular(&DMatrix::identity(n, n))?;
                Some(inv.norm_squared())
            }
            Precision::Woodbury(..) => None,
        }
    }

    pub(crate) fn from_component(c: &GaussianComponent) -> Result<Self> {
        let n = c.dimension();
        let k = c.rank();
        if c.noise_var > 0.0 && k < n {
            let s2 = c.noise_var;
            let mut m = c.cov_factor.tr_mul(&c.cov_factor);
            for i in 0..k {
                m[(i, i)] += s2;
            }
            let (ch, _) = cholesky_jitter(&m)?;
            let logdet = (n - k) as f64 * s2.ln() + chol_logdet(&ch);
            Ok(PreparedGaussian {
                mean: c.mean.clone(),
                log_norm: -0.5 * (n as f64 * LN_2PI + logdet),
                kind: Precision::Woodbury(c.cov_factor.clone(), ch.l(), s2),
            })
        } else {
            Self::from_dense(c.mean.clone(), &c.covariance())
        }
    }

    /// Log density of each column of `xt` (`n × m`).
    pub(crate) fn log_pdf_columns(&self, xt: &DMatrix<f64>) -> Vec<f64> {
        let m = xt.ncols();
        let starts: Vec<usize> = (0..m).step_by(COLUMN_CHUNK).collect();
        starts
            .par_iter()
            .flat_map_iter(|&s| {
                let w = COLUMN_CHUNK.min(m - s);
                let mut r = xt.columns(s, w).into_owned();
                for mut col in r.column_iter_mut() {
                    col -= &self.mean;
                }
                self.quad(&r).into_iter().map(|q| self.log_norm - 0.5 * q)
            })
            .collect()
    }

    pub(crate) fn log_pdf(&self, x: &DVector<f64>) -> f64 {
        let r = DMatrix::from_column_slice(x.len(), 1, (x - &self.mean).as_slice());
        self.log_norm - 0.5 * self.quad(&r)[0]
    }

    /// Mahalanobis quadratic form of each column of `r`.
    fn quad(&self, r: &DMatrix<f64>) -> Vec<f64> {
        match &self.kind {
            Precision::Dense(l) => {
                let y = l.solve_lower_triangular(r).expect("nonsingular Cholesky factor");
                y.column_iter().map(|c| c.norm_squared()).collect()
            }
            Precision::Woodbury(f, l, s2) => {
                let p = f.tr_mul(r);
                let y = l.solve_lower_triangular(&p).expect("nonsingular Cholesky factor");
                r.column_iter()
                    .zip(y.column_iter())
                    .map(|(rc, yc)| (rc.norm_squared() - yc.norm_squared()) / s2)
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn comp(weight: f64, mean: &[f64], cov: &[f64]) -> GaussianComponent {
        let n = mean.len();
        GaussianComponent::from_covariance(weight, DVector::from_column_slice(mean), &DMatrix::from_row_slice(n, n, cov))
    }

    #[test]
    fn standard_normal_density_at_zero() {
        let m = MixtureModel::new(vec![comp(1.0, &[0.0], &[1.0])], SegmentKind::FinalApproach).unwrap();
        let ll = m.log_likelihood(&DMatrix::from_element(1, 1, 0.0)).unwrap();
        assert!((ll - (-0.5 * LN_2PI)).abs() < 1e-12);
    }

    #[test]
    fn duplicated_data_doubles_log_likelihood() {
        let m = MixtureModel::new(
            vec![comp(0.3, &[0.0, 1.0], &[2.0, 0.3, 0.3, 1.0]), comp(0.7, &[3.0, -1.0], &[1.0, 0.0, 0.0, 0.5])],
            SegmentKind::FinalApproach,
        )
        .unwrap();
        let data = DMatrix::from_row_slice(3, 2, &[0.1, 0.2, 2.0, -1.0, 5.0, 5.0]);
        let twice = DMatrix::from_fn(6, 2, |i, j| data[(i % 3, j)]);
        let a = m.log_likelihood(&data).unwrap();
        let b = m.log_likelihood(&twice).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-9 * a.abs());
    }

    #[test]
    fn midpoint_of_symmetric_pair_matches_hand_sum() {
        let m = MixtureModel::new(
            vec![comp(0.5, &[-1.0, 0.0], &[1.0, 0.0, 0.0, 1.0]), comp(0.5, &[1.0, 0.0], &[1.0, 0.0, 0.0, 1.0])],
            SegmentKind::FinalApproach,
        )
        .unwrap();
        let ll = m.log_likelihood(&DMatrix::from_row_slice(1, 2, &[0.0, 0.0])).unwrap();
        // each term: 0.5 * exp(-1/2) / (2π)
        let hand = (2.0 * 0.5 * (-0.5f64).exp() / (2.0 * std::f64::consts::PI)).ln();
        assert!((ll - hand).abs() < 1e-12);
    }

    #[test]
    fn woodbury_matches_dense() {
        let f = DMatrix::from_row_slice(4, 2, &[1.0, 0.2, -0.5, 0.7, 0.3, 0.3, 2.0, -1.0]);
        let c = GaussianComponent {
            weight: 1.0,
            mean: DVector::from_column_slice(&[0.5, -0.5, 1.0, 0.0]),
            cov_factor: f,
            noise_var: 0.2,
        };
        let w = PreparedGaussian::from_component(&c).unwrap();
        let d = PreparedGaussian::from_dense(c.mean.clone(), &c.covariance()).unwrap();
        let x = DVector::from_column_slice(&[1.0, 2.0, -1.0, 0.3]);
        assert!((w.log_pdf(&x) - d.log_pdf(&x)).abs() < 1e-10);
    }

    #[test]
    fn zero_covariance_samples_the_mean() {
        let c = GaussianComponent {
            weight: 1.0,
            mean: DVector::from_column_slice(&[1.0, 2.0]),
            cov_factor: DMatrix::zeros(2, 0),
            noise_var: 0.0,
        };
        let m = MixtureModel::new(vec![c], SegmentKind::RadarVector).unwrap();
        let mut rng = seeded(1);
        for _ in 0..10 {
            assert_eq!(m.sample(&mut rng).0.as_slice(), &[1.0, 2.0]);
        }
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(MixtureModel::new(vec![comp(0.5, &[0.0], &[1.0])], SegmentKind::FinalApproach).is_err());
    }

    #[test]
    fn compression_keeps_leading_spectrum() {
        let cov = [4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 1.0];
        let m = MixtureModel::new(vec![comp(1.0, &[0.0, 0.0, 0.0], &cov)], SegmentKind::FinalApproach).unwrap();
        let c = m.compressed(2).unwrap();
        assert_eq!(c.components[0].rank(), 2);
        let (orig, _) = crate::linalg::sym_eigen_desc(&m.components[0].covariance());
        let (new, _) = crate::linalg::sym_eigen_desc(&c.components[0].covariance());
        assert!((orig[0] - new[0]).abs() < 1e-9 && (orig[1] - new[1]).abs() < 1e-9);
        assert!((new[2] - orig[2]).abs() < 1e-9);
        assert_eq!(m.compressed(3).unwrap(), m);
    }
}
