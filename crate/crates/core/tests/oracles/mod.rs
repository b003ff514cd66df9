//! Independent reference implementations used by the integration and
//! acceptance suites. Written for clarity, not speed.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Minimum over every monotone warping path from (0, 0) to (m-1, n-1),
/// costs summed in path order.
pub fn dtw_brute_force(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    fn walk(a: &[Vec<f64>], b: &[Vec<f64>], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + euclid(&a[i], &b[j]);
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = best.min(acc);
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

/// Textbook silhouette: for each point, mean distance to the rest of its
/// cluster against the smallest mean distance to another cluster.
pub fn silhouette_brute_force(data: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let m = data.nrows();
    let k = labels.iter().max().unwrap() + 1;
    let row = |i: usize| -> Vec<f64> { data.row(i).iter().copied().collect() };
    let mut total = 0.0;
    for i in 0..m {
        let own: Vec<usize> = (0..m).filter(|&j| j != i && labels[j] == labels[i]).collect();
        if own.is_empty() {
            continue;
        }
        let mean_to = |members: &[usize]| {
            let mut s = 0.0;
            for &j in members {
                s += euclid(&row(i), &row(j));
            }
            s / members.len() as f64
        };
        let a = mean_to(&own);
        let mut b = f64::INFINITY;
        for c in 0..k {
            if c == labels[i] {
                continue;
            }
            let members: Vec<usize> = (0..m).filter(|&j| labels[j] == c).collect();
            if !members.is_empty() {
                b = b.min(mean_to(&members));
            }
        }
        let den = a.max(b);
        total += if den > 0.0 { (b - a) / den } else { 0.0 };
    }
    total / m as f64
}

/// Dense Gaussian log density through an explicit inverse and determinant.
pub fn gaussian_log_pdf(x: &DVector<f64>, mean: &DVector<f64>, cov: &DMatrix<f64>) -> f64 {
    let n = x.len() as f64;
    let inv = cov.clone().try_inverse().expect("invertible covariance");
    let d = x - mean;
    let q = (d.transpose() * inv * &d)[(0, 0)];
    -0.5 * (n * (2.0 * std::f64::consts::PI).ln() + cov.determinant().ln() + q)
}

/// A mixture in plain dense form.
pub struct DenseMixture {
    pub weights: Vec<f64>,
    pub means: Vec<DVector<f64>>,
    pub covs: Vec<DMatrix<f64>>,
}

impl DenseMixture {
    pub fn log_joint(&self, x: &DVector<f64>) -> Vec<f64> {
        (0..self.weights.len())
            .map(|j| self.weights[j].ln() + gaussian_log_pdf(x, &self.means[j], &self.covs[j]))
            .collect()
    }
}

/// Self-normalized importance-sampling estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

/// Monte-Carlo conditional of a mixture given `x[observed] = values`,
/// using only joint densities. Proposal: each component's free-block
/// marginal with doubled covariance, mixed by the prior weights. Returns
/// per-component posterior weights and the conditional mean of each free
/// coordinate (increasing index order).
pub fn conditional_by_importance<R: Rng>(
    mix: &DenseMixture,
    observed: &[usize],
    values: &[f64],
    samples: usize,
    rng: &mut R,
) -> (Vec<Estimate>, Vec<Estimate>) {
    let n = mix.means[0].len();
    let free: Vec<usize> = (0..n).filter(|i| !observed.contains(i)).collect();
    let k = mix.weights.len();
    let nb = free.len();
    let proposals: Vec<(DVector<f64>, DMatrix<f64>, DMatrix<f64>)> = (0..k)
        .map(|j| {
            let mu = DVector::from_iterator(nb, free.iter().map(|&i| mix.means[j][i]));
            let cov = DMatrix::from_fn(nb, nb, |r, c| 2.0 * mix.covs[j][(free[r], free[c])]);
            let l = cov.clone().cholesky().expect("proposal covariance").l();
            (mu, cov, l)
        })
        .collect();
    let mut x = DVector::zeros(n);
    for (&i, &v) in observed.iter().zip(values) {
        x[i] = v;
    }
    let mut logw = Vec::with_capacity(samples);
    let mut resp = Vec::with_capacity(samples);
    let mut xb = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut u = rng.random::<f64>();
        let mut pick = k - 1;
        for (j, w) in mix.weights.iter().enumerate() {
            if u < *w {
                pick = j;
                break;
            }
            u -= w;
        }
        let z = DVector::from_fn(nb, |_, _| rng.sample::<f64, _>(StandardNormal));
        let b = &proposals[pick].0 + &proposals[pick].2 * z;
        for (r, &i) in free.iter().enumerate() {
            x[i] = b[r];
        }
        let q: Vec<f64> = (0..k)
            .map(|j| mix.weights[j].ln() + gaussian_log_pdf(&b, &proposals[j].0, &proposals[j].1))
            .collect();
        let lj = mix.log_joint(&x);
        let lp = log_sum_exp(&lj);
        logw.push(lp - log_sum_exp(&q));
        resp.push(lj.iter().map(|v| (v - lp).exp()).collect::<Vec<f64>>());
        xb.push(b);
    }
    let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|v| (v - top).exp()).collect();
    let sw: f64 = w.iter().sum();
    let estimate = |f: &dyn Fn(usize) -> f64| {
        let value = (0..samples).map(|i| w[i] * f(i)).sum::<f64>() / sw;
        let var = (0..samples).map(|i| (w[i] * (f(i) - value)).powi(2)).sum::<f64>() / (sw * sw);
        Estimate {
            value,
            std_err: var.sqrt(),
        }
    };
    let weights = (0..k).map(|j| estimate(&|i| resp[i][j])).collect();
    let means = (0..nb).map(|r| estimate(&|i| xb[i][r])).collect();
    (weights, means)
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Random symmetric positive definite matrix `A Aᵀ + eps I`.
pub fn random_spd<R: Rng>(n: usize, eps: f64, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut s = &a * a.transpose();
    for i in 0..n {
        s[(i, i)] += eps;
    }
    (&s + s.transpose()) * 0.5
}

/// Eigenvalues of a symmetric PSD matrix via SVD, descending.
pub fn psd_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Geodetic → ENU by the textbook ECEF difference and rotation, metres.
pub fn enu_oracle(lat: f64, lon: f64, alt_m: f64, lat0: f64, lon0: f64, alt0_m: f64) -> [f64; 3] {
    let a = 6_378_137.0;
    let f = 1.0 / 298.257_223_563;
    let e2 = f * (2.0 - f);
    let ecef = |lat: f64, lon: f64, h: f64| {
        let (p, l) = (lat.to_radians(), lon.to_radians());
        let n = a / (1.0 - e2 * p.sin().powi(2)).sqrt();
        [(n + h) * p.cos() * l.cos(), (n + h) * p.cos() * l.sin(), (n * (1.0 - e2) + h) * p.sin()]
    };
    let p = ecef(lat, lon, alt_m);
    let o = ecef(lat0, lon0, alt0_m);
    let d = [p[0] - o[0], p[1] - o[1], p[2] - o[2]];
    let (p0, l0) = (lat0.to_radians(), lon0.to_radians());
    [
        -l0.sin() * d[0] + l0.cos() * d[1],
        -p0.sin() * l0.cos() * d[0] - p0.sin() * l0.sin() * d[1] + p0.cos() * d[2],
        p0.cos() * l0.cos() * d[0] + p0.cos() * l0.sin() * d[1] + p0.sin() * d[2],
    ]
}

/// Vincenty inverse geodesic distance on WGS84, metres.
pub fn vincenty(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let a = 6_378_137.0;
    let f = 1.0 / 298.257_223_563;
    let b = a * (1.0 - f);
    let l = (lon2 - lon1).to_radians();
    let u1 = ((1.0 - f) * lat1.to_radians().tan()).atan();
    let u2 = ((1.0 - f) * lat2.to_radians().tan()).atan();
    let (su1, cu1, su2, cu2) = (u1.sin(), u1.cos(), u2.sin(), u2.cos());
    let mut lambda = l;
    for _ in 0..200 {
        let (sl, cl) = (lambda.sin(), lambda.cos());
        let sin_sigma = ((cu2 * sl).powi(2) + (cu1 * su2 - su1 * cu2 * cl).powi(2)).sqrt();
        if sin_sigma == 0.0 {
            return 0.0;
        }
        let cos_sigma = su1 * su2 + cu1 * cu2 * cl;
        let sigma = sin_sigma.atan2(cos_sigma);
        let sin_alpha = cu1 * cu2 * sl / sin_sigma;
        let cos2_alpha = 1.0 - sin_alpha * sin_alpha;
        let cos_2sm = if cos2_alpha != 0.0 { cos_sigma - 2.0 * su1 * su2 / cos2_alpha } else { 0.0 };
        let c = f / 16.0 * cos2_alpha * (4.0 + f * (4.0 - 3.0 * cos2_alpha));
        let prev = lambda;
        lambda = l + (1.0 - c) * f * sin_alpha * (sigma + c * sin_sigma * (cos_2sm + c * cos_sigma * (-1.0 + 2.0 * cos_2sm * cos_2sm)));
        if (lambda - prev).abs() < 1e-13 {
            let u_sq = cos2_alpha * (a * a - b * b) / (b * b);
            let aa = 1.0 + u_sq / 16384.0 * (4096.0 + u_sq * (-768.0 + u_sq * (320.0 - 175.0 * u_sq)));
            let bb = u_sq / 1024.0 * (256.0 + u_sq * (-128.0 + u_sq * (74.0 - 47.0 * u_sq)));
            let ds = bb
                * sin_sigma
                * (cos_2sm
                    + bb / 4.0
                        * (cos_sigma * (-1.0 + 2.0 * cos_2sm * cos_2sm)
                            - bb / 6.0 * cos_2sm * (-3.0 + 4.0 * sin_sigma * sin_sigma) * (-3.0 + 4.0 * cos_2sm * cos_2sm)));
            return b * aa * (sigma - ds);
        }
    }
    panic!("vincenty did not converge");
}

/// Index of the component whose leading `d × d` covariance block is
/// nearest in Frobenius norm to `target`, by exhaustive comparison.
pub fn nearest_block(covs: &[DMatrix<f64>], target: &DMatrix<f64>, at: usize, d: usize) -> usize {
    let mut best = (0, f64::INFINITY);
    for (j, c) in covs.iter().enumerate() {
        let mut s = 0.0;
        for r in 0..d {
            for q in 0..d {
                s += (c[(at + r, at + q)] - target[(r, q)]).powi(2);
            }
        }
        if s.sqrt() < best.1 {
            best = (j, s.sqrt());
        }
    }
    best.0
}
