use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::{em_fit, EmOptions, SegmentKind};
use crate::rng::Rng;

/// Mean silhouette coefficient of a labeling. Points alone in their
/// cluster score 0.
pub fn silhouette_score(data: &DMatrix<f64>, labels: &[usize]) -> Result<f64> {
    let m = data.nrows();
    if labels.len() != m {
        return Err(Error::Dimension {
            expected: m,
            got: labels.len(),
        });
    }
    let k = labels.iter().max().map_or(0, |&l| l + 1);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::invalid("silhouette needs at least two non-empty clusters"));
    }
    let xt = data.transpose();
    let s: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let li = labels[i];
            if sizes[li] == 1 {
                return 0.0;
            }
            let xi = xt.column(i);
            let mut sums = vec![0.0; k];
            for j in 0..m {
                if j != i {
                    let d: f64 = xi.iter().zip(xt.column(j).iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                    sums[labels[j]] += d.sqrt();
                }
            }
            let a = sums[li] / (sizes[li] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != li && sizes[c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let den = a.max(b);
            if den > 0.0 {
                (b - a) / den
            } else {
                0.0
            }
        })
        .collect();
    Ok(s.iter().sum::<f64>() / m as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteSweep {
    pub best: usize,
    /// Score per grid value, in grid order.
    pub curve: Vec<(usize, f64)>,
}

/// Fit a mixture for each `K` in the grid and score its hard labels.
/// Ties go to the earliest grid entry. A fit whose labels collapse to one
/// cluster scores -1.
pub fn silhouette_sweep(data: &DMatrix<f64>, k_grid: &[usize], opts: &EmOptions, rng: &mut Rng) -> Result<SilhouetteSweep> {
    if k_grid.is_empty() {
        return Err(Error::invalid("component grid is empty"));
    }
    if let Some(&bad) = k_grid.iter().find(|&&k| k < 2) {
        return Err(Error::invalid(format!("silhouette grid value {bad} is below 2")));
    }
    let mut curve = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let fit = em_fit(data, k, SegmentKind::FinalApproach, opts, rng)?;
        let score = match silhouette_score(data, &fit.labels) {
            Ok(s) => s,
            Err(Error::InvalidInput(_)) => -1.0,
            Err(e) => return Err(e),
        };
        log::info!("silhouette K={k}: {score:.4}");
        curve.push((k, score));
    }
    let mut best = 0;
    for (i, c) in curve.iter().enumerate() {
        if c.1 > curve[best].1 {
            best = i;
        }
    }
    Ok(SilhouetteSweep {
        best: curve[best].0,
        curve,
    })
}
