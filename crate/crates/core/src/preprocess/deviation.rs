use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::EnuPoint;
use crate::procedures::ProceduralTrajectory;
use crate::trajectory::path_length;

/// A trajectory expressed relative to its procedural trajectory:
/// `[t, d, dx_1, dy_1, dz_1, ..., dx_T, dy_T, dz_T]`, dimension `3T + 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationVector {
    /// Seconds.
    pub transit_time: f64,
    /// Meters.
    pub total_distance: f64,
    pub deviations: Vec<[f64; 3]>,
}

pub const fn deviation_dim(len: usize) -> usize {
    3 * len + 2
}

impl DeviationVector {
    pub fn len(&self) -> usize {
        self.deviations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deviations.is_empty()
    }

    pub fn dim(&self) -> usize {
        deviation_dim(self.len())
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.push(self.transit_time);
        v.push(self.total_distance);
        for d in &self.deviations {
            v.extend_from_slice(d);
        }
        v
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() < 5 || (v.len() - 2) % 3 != 0 {
            return Err(Error::invalid(format!(
                "deviation vector length {} is not 3T + 2",
                v.len()
            )));
        }
        Ok(DeviationVector {
            transit_time: v[0],
            total_distance: v[1],
            deviations: v[2..].chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
        })
    }
}

/// Deviations of a resampled trajectory from a procedural trajectory of
/// the same length.
pub fn build_deviation_vector(
    traj: &[EnuPoint],
    proc: &ProceduralTrajectory,
) -> Result<DeviationVector> {
    if traj.len() != proc.points.len() {
        return Err(Error::Dimension {
            expected: proc.points.len(),
            got: traj.len(),
        });
    }
    if traj.len() < 2 {
        return Err(Error::invalid("deviation vector needs at least two points"));
    }
    let transit_time = traj[traj.len() - 1].t - traj[0].t;
    let total_distance = path_length(traj);
    let deviations = traj
        .iter()
        .zip(&proc.points)
        .map(|(a, p)| [a.x - p.x, a.y - p.y, a.z - p.z])
        .collect();
    Ok(DeviationVector {
        transit_time,
        total_distance,
        deviations,
    })
}

/// Procedural positions plus deviations over `[0, t']` with
/// `t' = (tau_1 / tau_2) * d'`, `d'` the procedural total distance. Points
/// keep the procedural's relative timing (evenly spaced for any resampled
/// procedural; also when it has no positive duration).
pub fn reconstruct_trajectory(
    tau: &DeviationVector,
    proc: &ProceduralTrajectory,
) -> Result<Vec<EnuPoint>> {
    let n = proc.points.len();
    if tau.len() != n {
        return Err(Error::Dimension {
            expected: deviation_dim(n),
            got: tau.dim(),
        });
    }
    if !(tau.total_distance > 0.0) {
        return Err(Error::invalid(format!(
            "total distance {} must be positive",
            tau.total_distance
        )));
    }
    let duration = adjusted_transit_time(tau, proc.total_distance);
    let t0 = proc.points.first().map_or(0.0, |p| p.t);
    let span = proc.points.last().map_or(0.0, |p| p.t) - t0;
    let timed = span > 0.0 && proc.points.windows(2).all(|w| w[1].t >= w[0].t);
    Ok(proc
        .points
        .iter()
        .zip(&tau.deviations)
        .enumerate()
        .map(|(i, (p, d))| {
            let t = if i == n - 1 {
                duration
            } else if timed {
                duration * (p.t - t0) / span
            } else {
                duration * i as f64 / (n - 1) as f64
            };
            EnuPoint::new(t, p.x + d[0], p.y + d[1], p.z + d[2])
        })
        .collect())
}

/// `t' = (tau_1 / tau_2) * d'`.
pub fn adjusted_transit_time(tau: &DeviationVector, procedural_distance: f64) -> f64 {
    tau.transit_time / tau.total_distance * procedural_distance
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::nm_to_m;
    use proptest::prelude::*;

    fn line_proc(n: usize) -> ProceduralTrajectory {
        let points = (0..n)
            .map(|i| EnuPoint::new(10.0 * i as f64, 500.0 * i as f64, 100.0 * i as f64, 1000.0 - 20.0 * i as f64))
            .collect();
        ProceduralTrajectory::from_points("p", points)
    }

    #[test]
    fn zero_deviation_for_identical_trajectory() {
        let p = line_proc(6);
        let tau = build_deviation_vector(&p.points, &p).unwrap();
        assert!(tau.deviations.iter().all(|d| *d == [0.0; 3]));
        assert_eq!(tau.transit_time, 50.0);
        assert!((tau.total_distance - p.total_distance).abs() < 1e-9);
        assert_eq!(tau.dim(), 20);
    }

    #[test]
    fn translation_shows_as_constant_east_deviation() {
        let p = line_proc(5);
        let shifted: Vec<EnuPoint> = p.points.iter().map(|q| EnuPoint { x: q.x + 100.0, ..*q }).collect();
        let tau = build_deviation_vector(&shifted, &p).unwrap();
        for d in &tau.deviations {
            assert!((d[0] - 100.0).abs() < 1e-9 && d[1] == 0.0 && d[2] == 0.0);
        }
    }

    #[test]
    fn adjusted_transit_time_arithmetic() {
        let tau = DeviationVector {
            transit_time: 600.0,
            total_distance: nm_to_m(20.0),
            deviations: vec![[0.0; 3]; 2],
        };
        assert!((adjusted_transit_time(&tau, nm_to_m(30.0)) - 900.0).abs() < 1e-9);
    }

    #[test]
    fn zero_deviation_reconstructs_procedure() {
        let p = line_proc(7);
        let tau = DeviationVector {
            transit_time: 123.0,
            total_distance: 4567.0,
            deviations: vec![[0.0; 3]; 7],
        };
        let out = reconstruct_trajectory(&tau, &p).unwrap();
        for (a, b) in out.iter().zip(&p.points) {
            assert_eq!(a.pos(), b.pos());
        }
    }

    #[test]
    fn length_mismatch_and_bad_distance() {
        let p = line_proc(4);
        assert!(build_deviation_vector(&p.points[..3], &p).is_err());
        let tau = DeviationVector { transit_time: 1.0, total_distance: 0.0, deviations: vec![[0.0; 3]; 4] };
        assert!(reconstruct_trajectory(&tau, &p).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_when_distances_agree(
            offsets in proptest::collection::vec((-500.0f64..500.0, -500.0f64..500.0, -100.0f64..100.0), 5),
            duration in 10.0f64..1000.0,
            shift in (-2000.0f64..2000.0, -2000.0f64..2000.0),
        ) {
            // trajectory: a wiggly path with uniform times from 0
            let n = offsets.len();
            let traj: Vec<EnuPoint> = offsets.iter().enumerate().map(|(i, o)| {
                EnuPoint::new(duration * i as f64 / (n - 1) as f64, 1000.0 * i as f64 + o.0, o.1, 900.0 + o.2)
            }).collect();
            // procedure: the same path translated, so d' = tau_2
            let proc = ProceduralTrajectory::from_points(
                "p",
                traj.iter().map(|q| EnuPoint { x: q.x + shift.0, y: q.y + shift.1, ..*q }).collect(),
            );
            let tau = build_deviation_vector(&traj, &proc).unwrap();
            let back = reconstruct_trajectory(&tau, &proc).unwrap();
            for (a, b) in back.iter().zip(&traj) {
                prop_assert!((a.x - b.x).abs() < 1e-9 && (a.y - b.y).abs() < 1e-9 && (a.z - b.z).abs() < 1e-9);
                prop_assert!((a.t - b.t).abs() < 1e-9 * duration.max(1.0));
            }
        }
    }
}
