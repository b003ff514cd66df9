use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::ProcedurePair;
use crate::error::{Error, Result};
use crate::ingest::EnuPoint;
use crate::preprocess::{pchip_resample, DeviationVector};
use crate::procedures::ProceduralTrajectory;

pub const DEFAULT_WINDOW_S: f64 = 180.0;

/// An arrival with its landing time and deviation vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalRecord {
    pub flight_id: String,
    pub procedure: String,
    pub arrival_time: f64,
    pub tau: DeviationVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseSample {
    pub first: String,
    pub second: String,
    pub tau1: DeviationVector,
    /// Seconds from the first arrival to the second.
    pub delta: f64,
    pub tau2: DeviationVector,
}

impl PairwiseSample {
    /// `[τ⁽¹⁾, δ, τ⁽²⁾]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.tau1.to_vec();
        v.push(self.delta);
        v.extend(self.tau2.to_vec());
        v
    }
}

/// Successive arrivals (by arrival time, stable for ties) no more than
/// `window` seconds apart, grouped by procedure combination. Each group is
/// returned as a row matrix of [`PairwiseSample::to_vec`].
pub fn extract_pairs(
    arrivals: &[ArrivalRecord],
    window: f64,
) -> Result<(Vec<PairwiseSample>, BTreeMap<ProcedurePair, DMatrix<f64>>)> {
    let mut order: Vec<usize> = (0..arrivals.len()).collect();
    order.sort_by(|&a, &b| arrivals[a].arrival_time.total_cmp(&arrivals[b].arrival_time));
    let mut samples = Vec::new();
    for w in order.windows(2) {
        let (a, b) = (&arrivals[w[0]], &arrivals[w[1]]);
        let delta = b.arrival_time - a.arrival_time;
        if delta <= window {
            if a.tau.len() != b.tau.len() {
                return Err(Error::Dimension {
                    expected: a.tau.dim(),
                    got: b.tau.dim(),
                });
            }
            samples.push(PairwiseSample {
                first: a.procedure.clone(),
                second: b.procedure.clone(),
                tau1: a.tau.clone(),
                delta,
                tau2: b.tau.clone(),
            });
        }
    }
    let mut rows: BTreeMap<ProcedurePair, Vec<Vec<f64>>> = BTreeMap::new();
    for s in &samples {
        rows.entry((s.first.clone(), s.second.clone())).or_default().push(s.to_vec());
    }
    let groups = rows
        .into_iter()
        .map(|(k, r)| {
            let dim = r[0].len();
            (k, DMatrix::from_fn(r.len(), dim, |i, j| r[i][j]))
        })
        .collect();
    Ok((samples, groups))
}

/// Whole-arrival procedural trajectory: the radar-vector trajectory
/// followed by the approach from the approach point nearest the
/// radar-vector end (times continued), resampled to `len` points and
/// re-based to start at 0.
pub fn arrival_procedural(rv: &ProceduralTrajectory, iap: &ProceduralTrajectory, len: usize) -> Result<ProceduralTrajectory> {
    let (Some(rv_first), Some(rv_last)) = (rv.points.first(), rv.points.last()) else {
        return Err(Error::invalid("empty radar-vector procedural trajectory"));
    };
    if iap.points.is_empty() {
        return Err(Error::invalid("empty approach procedural trajectory"));
    }
    let join = iap
        .points
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.dist(rv_last).total_cmp(&b.1.dist(rv_last)))
        .map_or(0, |(i, _)| i);
    let offset = rv_last.t - iap.points[join].t;
    let mut pts: Vec<EnuPoint> = rv.points.iter().map(|p| EnuPoint { t: p.t - rv_first.t, ..*p }).collect();
    let end = rv_last.t - rv_first.t;
    pts.extend(
        iap.points[join + 1..]
            .iter()
            .map(|p| EnuPoint { t: p.t + offset - rv_first.t, ..*p })
            .filter(|p| p.t > end),
    );
    let mut resampled = pchip_resample(&pts, len)?;
    let t0 = resampled[0].t;
    for p in &mut resampled {
        p.t -= t0;
    }
    Ok(ProceduralTrajectory::from_points(format!("{}+{}", rv.procedure, iap.procedure), resampled))
}
