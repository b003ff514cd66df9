//! Dynamic time warping with Euclidean local cost.
//!
//! `D(i, j) = |a_i - b_j| + min(D(i, j-1), D(i-1, j), D(i-1, j-1))`, with
//! the first row and column accumulating along their only predecessor.
//! Time O(mn), memory O(n); no warping window.

use crate::error::{Error, Result};
use crate::ingest::EnuPoint;
use crate::procedures::ProceduralTrajectory;

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// DTW distance between two sequences of equal-dimension points.
pub fn dtw_distance<P: AsRef<[f64]>>(a: &[P], b: &[P]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("dtw of an empty sequence"));
    }
    let n = b.len();
    let mut prev = vec![0.0f64; n];
    let mut cur = vec![0.0f64; n];
    for (i, ai) in a.iter().enumerate() {
        let ai = ai.as_ref();
        for j in 0..n {
            let cost = euclid(ai, b[j].as_ref());
            cur[j] = cost
                + match (i, j) {
                    (0, 0) => 0.0,
                    (0, _) => cur[j - 1],
                    (_, 0) => prev[0],
                    _ => cur[j - 1].min(prev[j]).min(prev[j - 1]),
                };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[n - 1])
}

fn horizontal(points: &[EnuPoint]) -> Vec<[f64; 2]> {
    points.iter().map(|p| [p.x, p.y]).collect()
}

/// Index of the radar-vector procedure nearest to `traj` by horizontal DTW
/// distance; ties go to the lowest index.
pub fn assign_procedure(traj: &[EnuPoint], procs: &[ProceduralTrajectory]) -> Result<usize> {
    if procs.is_empty() {
        return Err(Error::invalid("no candidate procedures"));
    }
    let a = horizontal(traj);
    let mut best = (0, f64::INFINITY);
    for (i, p) in procs.iter().enumerate() {
        let d = dtw_distance(&a, &horizontal(&p.points))?;
        if d < best.1 {
            best = (i, d);
        }
    }
    Ok(best.0)
}
