use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::EnuPoint;
use crate::trajectory::position_at;
use crate::units::{ft_to_m, nm_to_m};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountingUnit {
    /// One count per maximal run of consecutive violating samples of a pair.
    #[default]
    Event,
    /// One count per violating sample of a pair.
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationConfig {
    pub horizontal_min_nm: f64,
    pub vertical_min_ft: f64,
    #[serde(default)]
    pub unit: CountingUnit,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        SeparationConfig {
            horizontal_min_nm: 3.0,
            vertical_min_ft: 1000.0,
            unit: CountingUnit::Event,
        }
    }
}

impl SeparationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizontal_min_nm > 0.0 && self.vertical_min_ft > 0.0) {
            return Err(Error::invalid("separation minima must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub count: u64,
    pub per_scene_count: Vec<u64>,
    pub per_scene_violation: Vec<bool>,
}

/// Count losses of separation: instants at which a pair of aircraft is
/// closer than both minima at once. Each pair is checked on the union of
/// its sample times over the interval where both tracks exist.
pub fn loss_of_separation(scenes: &[Vec<Vec<EnuPoint>>], sep: &SeparationConfig) -> Result<SeparationReport> {
    sep.validate()?;
    let h = nm_to_m(sep.horizontal_min_nm);
    let v = ft_to_m(sep.vertical_min_ft);
    let per_scene_count: Vec<u64> = scenes
        .iter()
        .map(|scene| {
            let mut count = 0;
            for a in 0..scene.len() {
                for b in a + 1..scene.len() {
                    count += pair_count(&scene[a], &scene[b], h, v, sep.unit);
                }
            }
            count
        })
        .collect();
    Ok(SeparationReport {
        count: per_scene_count.iter().sum(),
        per_scene_violation: per_scene_count.iter().map(|&c| c > 0).collect(),
        per_scene_count,
    })
}

fn pair_count(a: &[EnuPoint], b: &[EnuPoint], h: f64, v: f64, unit: CountingUnit) -> u64 {
    let (Some(a0), Some(b0)) = (a.first(), b.first()) else {
        return 0;
    };
    let lo = a0.t.max(b0.t);
    let hi = a.last().unwrap().t.min(b.last().unwrap().t);
    if lo > hi {
        return 0;
    }
    let mut times: Vec<f64> = a.iter().chain(b).map(|p| p.t).filter(|&t| t >= lo && t <= hi).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut count = 0;
    let mut in_run = false;
    for t in times {
        let (Some(p), Some(q)) = (position_at(a, t), position_at(b, t)) else {
            continue;
        };
        let violating = (p[0] - q[0]).hypot(p[1] - q[1]) < h && (p[2] - q[2]).abs() < v;
        match unit {
            CountingUnit::Sample => count += u64::from(violating),
            CountingUnit::Event => count += u64::from(violating && !in_run),
        }
        in_run = violating;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(h_nm: f64, v_ft: f64) -> Vec<Vec<EnuPoint>> {
        let a = (0..5).map(|i| EnuPoint::new(i as f64, 0.0, 0.0, 1000.0)).collect();
        let b = (0..5)
            .map(|i| EnuPoint::new(i as f64, nm_to_m(h_nm), 0.0, 1000.0 + ft_to_m(v_ft)))
            .collect();
        vec![a, b]
    }

    #[test]
    fn rule_fixtures() {
        let sep = SeparationConfig::default();
        assert_eq!(loss_of_separation(&[pair(2.9, 1500.0)], &sep).unwrap().count, 0);
        let r = loss_of_separation(&[pair(2.9, 500.0)], &sep).unwrap();
        assert_eq!(r.count, 1);
        assert_eq!(r.per_scene_violation, vec![true]);
        assert_eq!(loss_of_separation(&[pair(3.5, 500.0)], &sep).unwrap().count, 0);
        let samples = SeparationConfig { unit: CountingUnit::Sample, ..sep };
        assert_eq!(loss_of_separation(&[pair(2.9, 500.0)], &samples).unwrap().count, 5);
    }

    #[test]
    fn separate_runs_are_separate_events() {
        // b approaches, leaves, approaches again
        let a: Vec<EnuPoint> = (0..7).map(|i| EnuPoint::new(i as f64, 0.0, 0.0, 0.0)).collect();
        let xs = [1.0, 1.0, 10.0, 10.0, 1.0, 1.0, 10.0];
        let b: Vec<EnuPoint> = xs.iter().enumerate().map(|(i, &x)| EnuPoint::new(i as f64, nm_to_m(x), 0.0, 0.0)).collect();
        let r = loss_of_separation(&[vec![a, b]], &SeparationConfig::default()).unwrap();
        assert_eq!(r.count, 2);
    }

    #[test]
    fn non_overlapping_tracks_never_conflict() {
        let a: Vec<EnuPoint> = (0..3).map(|i| EnuPoint::new(i as f64, 0.0, 0.0, 0.0)).collect();
        let b: Vec<EnuPoint> = (0..3).map(|i| EnuPoint::new(10.0 + i as f64, 0.0, 0.0, 0.0)).collect();
        assert_eq!(loss_of_separation(&[vec![a, b]], &SeparationConfig::default()).unwrap().count, 0);
    }

    #[test]
    fn non_positive_minima_are_rejected() {
        let sep = SeparationConfig { horizontal_min_nm: 0.0, ..Default::default() };
        assert!(loss_of_separation(&[], &sep).is_err());
    }
}
