//! Lloyd's k-means with k-means++ seeding, used for nominal-path
//! extraction and to initialize EM.

use nalgebra::DMatrix;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Rng;

const MAX_LLOYD_ITER: usize = 300;

#[derive(Debug, Clone)]
pub struct KMeans {
    /// One center per row.
    pub centers: DMatrix<f64>,
    pub labels: Vec<usize>,
    pub inertia: f64,
}

impl KMeans {
    pub fn k(&self) -> usize {
        self.centers.nrows()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Best-of-`restarts` k-means over the rows of `data`.
///
/// A run that ends with an empty cluster is discarded and retried. If every
/// run ends degenerate (for example all rows identical), the lowest-inertia
/// degenerate run is returned with its empty clusters removed, so the result
/// may hold fewer than `k` centers.
pub fn kmeans(data: &DMatrix<f64>, k: usize, restarts: usize, rng: &mut Rng) -> Result<KMeans> {
    let m = data.nrows();
    if k == 0 {
        return Err(Error::invalid("k-means needs k >= 1"));
    }
    if k > m {
        return Err(Error::invalid(format!("k-means with k = {k} > {m} rows")));
    }
    let mut best: Option<KMeans> = None;
    let mut best_degenerate: Option<KMeans> = None;
    for _ in 0..restarts.max(1) {
        let (run, empty) = lloyd(data, k, rng);
        let slot = if empty { &mut best_degenerate } else { &mut best };
        if slot.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            *slot = Some(run);
        }
    }
    match best {
        Some(b) => Ok(b),
        None => Ok(drop_empty(best_degenerate.expect("at least one run"))),
    }
}

fn drop_empty(run: KMeans) -> KMeans {
    let sizes = run.cluster_sizes();
    let kept: Vec<usize> = (0..run.k()).filter(|&j| sizes[j] > 0).collect();
    let mut remap = vec![usize::MAX; run.k()];
    for (new, &old) in kept.iter().enumerate() {
        remap[old] = new;
    }
    let centers = DMatrix::from_fn(kept.len(), run.centers.ncols(), |i, c| {
        run.centers[(kept[i], c)]
    });
    let labels = run.labels.iter().map(|&l| remap[l]).collect();
    KMeans {
        centers,
        labels,
        inertia: run.inertia,
    }
}

fn sq_dist_row(data: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, j: usize) -> f64 {
    data.row(i)
        .iter()
        .zip(centers.row(j).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// k-means++ seeding: each new center is drawn with probability
/// proportional to its squared distance from the nearest chosen center.
pub fn plus_plus_seeds(data: &DMatrix<f64>, k: usize, rng: &mut Rng) -> DMatrix<f64> {
    let m = data.nrows();
    let n = data.ncols();
    let mut centers = DMatrix::zeros(k, n);
    let first = rng.random_range(0..m);
    centers.set_row(0, &data.row(first));
    let mut d2: Vec<f64> = (0..m).map(|i| sq_dist_row(data, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut chosen = m - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    chosen = i;
                    break;
                }
                u -= w;
            }
            chosen
        } else {
            rng.random_range(0..m)
        };
        centers.set_row(c, &data.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist_row(data, i, &centers, c));
        }
    }
    centers
}

/// Nearest center per row; ties go to the lowest index.
pub fn assign(data: &DMatrix<f64>, centers: &DMatrix<f64>) -> (Vec<usize>, f64) {
    let mut inertia = 0.0;
    let labels = (0..data.nrows())
        .map(|i| {
            let mut best = (0, f64::INFINITY);
            for j in 0..centers.nrows() {
                let d = sq_dist_row(data, i, centers, j);
                if d < best.1 {
                    best = (j, d);
                }
            }
            inertia += best.1;
            best.0
        })
        .collect();
    (labels, inertia)
}

fn lloyd(data: &DMatrix<f64>, k: usize, rng: &mut Rng) -> (KMeans, bool) {
    let n = data.ncols();
    let mut centers = plus_plus_seeds(data, k, rng);
    let (mut labels, mut inertia) = assign(data, &centers);
    let mut empty = false;
    for _ in 0..MAX_LLOYD_ITER {
        let mut sums = DMatrix::zeros(k, n);
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            let mut row = sums.row_mut(l);
            row += data.row(i);
        }
        empty = counts.contains(&0);
        if empty {
            break;
        }
        for j in 0..k {
            let mean = sums.row(j) / counts[j] as f64;
            centers.set_row(j, &mean);
        }
        let (next, next_inertia) = assign(data, &centers);
        inertia = next_inertia;
        if next == labels {
            break;
        }
        labels = next;
    }
    (
        KMeans {
            centers,
            labels,
            inertia,
        },
        empty,
    )
}
