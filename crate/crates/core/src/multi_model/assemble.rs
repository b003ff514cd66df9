use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::PairwiseModels;
use crate::error::{Error, Result};
use crate::linalg::{psd_factor, sym_eigen_desc, symmetrize};
use crate::rng::Rng;

/// Which pairwise component supplied a block of the scene parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSource {
    /// 1: sampled, 2: matched on the shared aircraft block, 3: matched on
    /// both diagonal blocks (cross block only).
    pub step: u8,
    /// Aircraft indices (0-based) of the pair.
    pub aircraft: (usize, usize),
    pub procedures: (String, String),
    pub component: usize,
}

/// Mean and covariance over `[τ⁽¹⁾, δ¹², τ⁽²⁾, ..., τ⁽ᴺ⁾]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneParams {
    pub procedures: Vec<String>,
    pub tau_dim: usize,
    pub mean: DVector<f64>,
    /// Assembled covariance after PSD repair.
    pub covariance: DMatrix<f64>,
    /// `covariance = factor · factorᵀ`.
    pub factor: DMatrix<f64>,
    /// Smallest eigenvalue of the assembled matrix before repair.
    pub min_eigenvalue: f64,
    /// Largest relative Frobenius change of an aircraft's diagonal block
    /// caused by the repair.
    pub max_block_drift: f64,
    pub provenance: Vec<BlockSource>,
}

impl SceneParams {
    pub fn n_aircraft(&self) -> usize {
        self.procedures.len()
    }

    /// Offset of aircraft `i`'s deviation vector.
    pub fn tau_offset(&self, i: usize) -> usize {
        i * (self.tau_dim + 1)
    }

    /// Index of the inter-arrival time between aircraft `i` and `i + 1`.
    pub fn delta_index(&self, i: usize) -> usize {
        i * (self.tau_dim + 1) + self.tau_dim
    }
}

fn block(m: &DMatrix<f64>, r: usize, c: usize, nr: usize, nc: usize) -> DMatrix<f64> {
    m.view((r, c), (nr, nc)).into_owned()
}

fn put(dst: &mut DMatrix<f64>, r: usize, c: usize, src: &DMatrix<f64>) {
    dst.view_mut((r, c), src.shape()).copy_from(src);
}

/// Assemble joint scene parameters for the procedure sequence from the
/// pairwise models.
///
/// The first pair's component is sampled by weight and contributes means
/// and all covariance blocks of aircraft 1 and 2. Each later aircraft `k`
/// takes the component of model `(p_{k-1}, p_k)` whose leading diagonal
/// block is nearest (Frobenius) to the block already assembled for
/// aircraft `k - 1`, contributing `δ`, `τ⁽ᵏ⁾` and their covariance with
/// aircraft `k - 1`. Every non-adjacent pair `(j, k)` then takes only the
/// cross block of the component of model `(p_j, p_k)` nearest on both
/// diagonal blocks. Blocks no model supplies are zero. Earlier steps win
/// where blocks overlap. The result is projected to the PSD cone.
pub fn assemble_scene_params(models: &PairwiseModels, procedures: &[String], rng: &mut Rng) -> Result<SceneParams> {
    let n_ac = procedures.len();
    if n_ac < 2 {
        return Err(Error::invalid("a scene needs at least two aircraft"));
    }
    let d = models.tau_dim();
    let stride = d + 1;
    let dim = n_ac * stride - 1;
    let mut mean = DVector::zeros(dim);
    let mut cov = DMatrix::zeros(dim, dim);
    let mut provenance = Vec::new();
    let covs = |m: &crate::mixture::MixtureModel| -> Vec<DMatrix<f64>> { m.components.iter().map(|c| c.covariance()).collect() };

    // step 1
    let first = models.get(&procedures[0], &procedures[1])?;
    let j = first.sample_component(rng);
    let c = &first.components[j];
    mean.rows_mut(0, 2 * d + 1).copy_from(&c.mean);
    put(&mut cov, 0, 0, &c.covariance());
    provenance.push(BlockSource {
        step: 1,
        aircraft: (0, 1),
        procedures: (procedures[0].clone(), procedures[1].clone()),
        component: j,
    });

    // step 2: chain the remaining aircraft
    for k in 2..n_ac {
        let model = models.get(&procedures[k - 1], &procedures[k])?;
        let cs = covs(model);
        let prev = k - 1;
        let target = block(&cov, prev * stride, prev * stride, d, d);
        let j = argmin(cs.iter().map(|s| (block(s, 0, 0, d, d) - &target).norm()));
        let s = &cs[j];
        let lo = prev * stride + d; // δ slot, then τ⁽ᵏ⁾
        mean.rows_mut(lo, d + 1).copy_from(&model.components[j].mean.rows(d, d + 1));
        put(&mut cov, lo, lo, &block(s, d, d, d + 1, d + 1));
        let cross = block(s, 0, d, d, d + 1);
        put(&mut cov, prev * stride, lo, &cross);
        put(&mut cov, lo, prev * stride, &cross.transpose());
        provenance.push(BlockSource {
            step: 2,
            aircraft: (prev, k),
            procedures: (procedures[prev].clone(), procedures[k].clone()),
            component: j,
        });
    }

    // step 3: non-adjacent cross blocks
    for k in 2..n_ac {
        for jac in 0..k - 1 {
            let model = models.get(&procedures[jac], &procedures[k])?;
            let cs = covs(model);
            let tj = block(&cov, jac * stride, jac * stride, d, d);
            let tk = block(&cov, k * stride, k * stride, d, d);
            let sel = argmin(cs.iter().map(|s| (block(s, 0, 0, d, d) - &tj).norm() + (block(s, d + 1, d + 1, d, d) - &tk).norm()));
            let cross = block(&cs[sel], 0, d + 1, d, d);
            put(&mut cov, jac * stride, k * stride, &cross);
            put(&mut cov, k * stride, jac * stride, &cross.transpose());
            provenance.push(BlockSource {
                step: 3,
                aircraft: (jac, k),
                procedures: (procedures[jac].clone(), procedures[k].clone()),
                component: sel,
            });
        }
    }

    let cov = symmetrize(&cov);
    let (values, _) = sym_eigen_desc(&cov);
    let min_eigenvalue = values[dim - 1];
    let factor = psd_factor(&cov);
    let (covariance, max_block_drift) = if min_eigenvalue < 0.0 {
        let repaired = symmetrize(&(&factor * factor.transpose()));
        let drift = (0..n_ac)
            .map(|i| {
                let before = block(&cov, i * stride, i * stride, d, d);
                let after = block(&repaired, i * stride, i * stride, d, d);
                let base = before.norm();
                if base > 0.0 {
                    (after - &before).norm() / base
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max);
        (repaired, drift)
    } else {
        (cov, 0.0)
    };
    if max_block_drift > 0.05 {
        log::warn!("scene covariance repair moved a diagonal block by {:.1}%", 100.0 * max_block_drift);
    }
    Ok(SceneParams {
        procedures: procedures.to_vec(),
        tau_dim: d,
        mean,
        covariance,
        factor,
        min_eigenvalue,
        max_block_drift,
        provenance,
    })
}

/// First index of the minimum.
fn argmin(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}
