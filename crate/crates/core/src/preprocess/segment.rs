use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::EnuPoint;
use crate::procedures::ProceduralTrajectory;
use super::pchip::pchip_resample;

/// An arrival split at the point where it settles onto its approach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentedArrival {
    pub radar_vector: Vec<EnuPoint>,
    pub final_approach: Vec<EnuPoint>,
    /// Index into the source trajectory of the first final-approach point.
    pub boundary: usize,
    pub assigned_procedure: Option<String>,
}

impl SegmentedArrival {
    pub fn split(traj: &[EnuPoint], boundary: usize) -> Self {
        SegmentedArrival {
            radar_vector: traj[..boundary].to_vec(),
            final_approach: traj[boundary..].to_vec(),
            boundary,
            assigned_procedure: None,
        }
    }

    /// Radar-vector part too short to model (fewer than two points).
    pub fn lacks_radar_vector(&self) -> bool {
        self.radar_vector.len() < 2
    }
}

/// Horizontal distance from `p` to the polyline through `line`.
pub fn distance_to_polyline(p: &EnuPoint, line: &[EnuPoint]) -> f64 {
    if line.len() == 1 {
        return p.horizontal_dist(&line[0]);
    }
    line.windows(2)
        .map(|w| point_segment_distance(p.x, p.y, &w[0], &w[1]))
        .fold(f64::INFINITY, f64::min)
}

fn point_segment_distance(px: f64, py: f64, a: &EnuPoint, b: &EnuPoint) -> f64 {
    let (vx, vy) = (b.x - a.x, b.y - a.y);
    let len2 = vx * vx + vy * vy;
    let s = if len2 > 0.0 {
        (((px - a.x) * vx + (py - a.y) * vy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (px - a.x - s * vx).hypot(py - a.y - s * vy)
}

/// First index from which every remaining point lies within
/// `threshold_m` (horizontally) of the approach polyline.
pub fn segment_trajectory(
    traj: &[EnuPoint],
    iap: &ProceduralTrajectory,
    threshold_m: f64,
) -> Result<usize> {
    let mut boundary = traj.len();
    for (i, p) in traj.iter().enumerate().rev() {
        if distance_to_polyline(p, &iap.points) < threshold_m {
            boundary = i;
        } else {
            break;
        }
    }
    if boundary == traj.len() {
        return Err(Error::Segmentation(
            "trajectory does not finish on the approach path".into(),
        ));
    }
    Ok(boundary)
}

/// Resampled training segments of one arrival whose radar-vector part
/// ends with the first `n_overlap` final-approach samples.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapSegments {
    /// `t_v` points: the flight up to the boundary resampled to
    /// `t_v - n_overlap + 1` points (last one dropped), then the overlap.
    pub radar_vector: Vec<EnuPoint>,
    /// `t_f` points evenly timed over `traj[boundary..]`.
    pub final_approach: Vec<EnuPoint>,
}

/// Split at `boundary` (first final-approach point) so that the two
/// segments share `n_overlap` identical points at the junction.
pub fn overlapping_segments(
    traj: &[EnuPoint],
    boundary: usize,
    t_v: usize,
    t_f: usize,
    n_overlap: usize,
) -> Result<OverlapSegments> {
    if boundary == 0 || boundary >= traj.len() {
        return Err(Error::Segmentation("no radar-vector part before the approach".into()));
    }
    if n_overlap == 0 || n_overlap >= t_f || n_overlap > t_v {
        return Err(Error::invalid(format!(
            "overlap {n_overlap} must be in 1..={} and below {t_f}",
            t_v
        )));
    }
    let fa_raw = &traj[boundary..];
    if fa_raw.len() < 2 {
        return Err(Error::Segmentation("final approach has fewer than two points".into()));
    }
    let final_approach = pchip_resample(fa_raw, t_f)?;
    let head = &final_approach[..n_overlap];
    let mut radar_vector = if t_v > n_overlap {
        // ends exactly on traj[boundary] = final_approach[0]
        let mut rv = pchip_resample(&traj[..=boundary], t_v - n_overlap + 1)?;
        rv.pop();
        rv
    } else {
        Vec::new()
    };
    radar_vector.extend_from_slice(head);
    Ok(OverlapSegments {
        radar_vector,
        final_approach,
    })
}
