use serde::{Deserialize, Serialize};

use crate::ingest::EnuPoint;
use crate::trajectory::position_at;
use crate::units::{m_to_nm, mps_to_kts};

pub const VARIABLE_NAMES: [&str; 4] = ["x_east", "y_north", "horizontal_speed", "closest_distance"];

/// Pooled per-point samples of the evaluation variables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryVariables {
    /// NM.
    pub x_east: Vec<f64>,
    /// NM.
    pub y_north: Vec<f64>,
    /// Knots, one per consecutive point pair.
    pub horizontal_speed: Vec<f64>,
    /// NM to the nearest other aircraft present at the same time.
    pub closest_distance: Vec<f64>,
}

impl TrajectoryVariables {
    pub fn get(&self, name: &str) -> Option<&[f64]> {
        match name {
            "x_east" => Some(&self.x_east),
            "y_north" => Some(&self.y_north),
            "horizontal_speed" => Some(&self.horizontal_speed),
            "closest_distance" => Some(&self.closest_distance),
            _ => None,
        }
    }
}

/// Extract the variables from scenes, each a list of trajectories on a
/// common clock. Other aircraft are interpolated linearly in time and only
/// count while their track spans the instant.
pub fn extract_variables(scenes: &[Vec<Vec<EnuPoint>>]) -> TrajectoryVariables {
    let mut out = TrajectoryVariables::default();
    for scene in scenes {
        for (a, traj) in scene.iter().enumerate() {
            for p in traj {
                out.x_east.push(m_to_nm(p.x));
                out.y_north.push(m_to_nm(p.y));
            }
            for w in traj.windows(2) {
                let dt = w[1].t - w[0].t;
                if dt > 0.0 {
                    out.horizontal_speed.push(mps_to_kts(w[0].horizontal_dist(&w[1]) / dt));
                }
            }
            for p in traj {
                let nearest = scene
                    .iter()
                    .enumerate()
                    .filter(|&(b, _)| b != a)
                    .filter_map(|(_, other)| position_at(other, p.t))
                    .map(|q| (p.x - q[0]).hypot(p.y - q[1]))
                    .fold(f64::INFINITY, f64::min);
                if nearest.is_finite() {
                    out.closest_distance.push(m_to_nm(nearest));
                }
            }
        }
    }
    out
}
