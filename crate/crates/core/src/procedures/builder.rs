use serde::{Deserialize, Serialize};

use super::{ProceduralTrajectory, Procedure, ProcedureKind};
use crate::error::{Error, Result};
use crate::ingest::{AirspaceConfig, EnuPoint, EnuTrack};
use crate::preprocess::{distance_to_polyline, Pchip};
use crate::units::{kts_to_mps, nm_to_m};

/// Dense samples per waypoint interval when tabulating arc length.
const DENSE_PER_INTERVAL: usize = 64;
/// Grid size for averaging exemplar timing profiles.
const PROFILE_GRID: usize = 401;

fn default_proximity() -> f64 {
    0.5
}
fn default_speed() -> f64 {
    140.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcedureOptions {
    /// An exemplar must pass this close (NM) to every waypoint.
    #[serde(default = "default_proximity")]
    pub proximity_nm: f64,
    /// Constant speed (knots) used when no timing source is available.
    #[serde(default = "default_speed")]
    pub default_speed_kts: f64,
}

impl Default for ProcedureOptions {
    fn default() -> Self {
        ProcedureOptions {
            proximity_nm: default_proximity(),
            default_speed_kts: default_speed(),
        }
    }
}

/// The continuous spatial path of a procedure: each ENU coordinate is a
/// PCHIP interpolant of cumulative horizontal chord length through the
/// waypoints.
#[derive(Debug, Clone)]
pub struct ProceduralPath {
    waypoints: Vec<EnuPoint>,
    fx: Pchip,
    fy: Pchip,
    fz: Pchip,
    /// Dense tabulation of the path and its cumulative horizontal arc.
    dense: Vec<EnuPoint>,
    arc: Vec<f64>,
}

impl ProceduralPath {
    pub fn new(proc: &Procedure, airspace: &AirspaceConfig) -> Result<Self> {
        proc.validate()?;
        let waypoints = waypoints_enu(proc, airspace);
        let mut chord = vec![0.0];
        for w in waypoints.windows(2) {
            let step = w[0].horizontal_dist(&w[1]);
            if !(step > 0.0) {
                return Err(Error::invalid(format!(
                    "procedure `{}` repeats a waypoint",
                    proc.name
                )));
            }
            chord.push(chord.last().unwrap() + step);
        }
        let fx = Pchip::new(chord.clone(), waypoints.iter().map(|p| p.x).collect())?;
        let fy = Pchip::new(chord.clone(), waypoints.iter().map(|p| p.y).collect())?;
        let fz = Pchip::new(chord.clone(), waypoints.iter().map(|p| p.z).collect())?;

        let mut dense = Vec::with_capacity((chord.len() - 1) * DENSE_PER_INTERVAL + 1);
        for k in 0..chord.len() - 1 {
            for q in 0..DENSE_PER_INTERVAL {
                let s = chord[k] + (chord[k + 1] - chord[k]) * q as f64 / DENSE_PER_INTERVAL as f64;
                dense.push(EnuPoint::new(s, fx.eval(s), fy.eval(s), fz.eval(s)));
            }
        }
        let s_end = *chord.last().unwrap();
        dense.push(EnuPoint::new(s_end, fx.eval(s_end), fy.eval(s_end), fz.eval(s_end)));
        let mut arc = vec![0.0];
        for w in dense.windows(2) {
            arc.push(arc.last().unwrap() + w[0].horizontal_dist(&w[1]));
        }
        Ok(ProceduralPath {
            waypoints,
            fx,
            fy,
            fz,
            dense,
            arc,
        })
    }

    pub fn waypoints(&self) -> &[EnuPoint] {
        &self.waypoints
    }

    /// Position at chord parameter `s` (the waypoints sit at their
    /// cumulative chord lengths).
    pub fn eval(&self, s: f64) -> [f64; 3] {
        [self.fx.eval(s), self.fy.eval(s), self.fz.eval(s)]
    }

    pub fn knots(&self) -> &[f64] {
        self.fx.knots()
    }

    /// Horizontal arc length of the path.
    pub fn horizontal_length(&self) -> f64 {
        *self.arc.last().unwrap()
    }

    pub fn length_3d(&self) -> f64 {
        crate::trajectory::path_length(&self.dense)
    }

    /// Point at fraction `u` in [0, 1] of horizontal arc length.
    pub fn at_fraction(&self, u: f64) -> [f64; 3] {
        let target = u.clamp(0.0, 1.0) * self.horizontal_length();
        let k = self.arc.partition_point(|&a| a <= target).clamp(1, self.arc.len() - 1);
        let (a0, a1) = (self.arc[k - 1], self.arc[k]);
        let s = if a1 > a0 { (target - a0) / (a1 - a0) } else { 0.0 };
        let (p, q) = (&self.dense[k - 1], &self.dense[k]);
        [
            p.x + s * (q.x - p.x),
            p.y + s * (q.y - p.y),
            p.z + s * (q.z - p.z),
        ]
    }
}

/// ENU waypoints. Missing altitudes are filled by linear interpolation
/// along the path between constrained waypoints (held constant past the
/// ends); with no constraint at all the path sits at the reference
/// altitude.
fn waypoints_enu(proc: &Procedure, airspace: &AirspaceConfig) -> Vec<EnuPoint> {
    let frame = airspace.frame();
    let flat: Vec<[f64; 3]> = proc
        .waypoints
        .iter()
        .map(|w| frame.to_enu(w.lat, w.lon, airspace.origin_alt_ft))
        .collect();
    let mut along = vec![0.0];
    for w in flat.windows(2) {
        along.push(along.last().unwrap() + (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]));
    }
    let known: Vec<(f64, f64)> = proc
        .waypoints
        .iter()
        .zip(&along)
        .filter_map(|(w, &s)| w.alt.map(|a| (s, a)))
        .collect();
    let alt_at = |s: f64| -> f64 {
        match known.as_slice() {
            [] => airspace.origin_alt_ft,
            [(_, a)] => *a,
            _ => {
                if s <= known[0].0 {
                    return known[0].1;
                }
                if s >= known[known.len() - 1].0 {
                    return known[known.len() - 1].1;
                }
                let k = known.partition_point(|&(ks, _)| ks <= s).clamp(1, known.len() - 1);
                let ((s0, a0), (s1, a1)) = (known[k - 1], known[k]);
                if s1 > s0 {
                    a0 + (a1 - a0) * (s - s0) / (s1 - s0)
                } else {
                    a0
                }
            }
        }
    };
    proc.waypoints
        .iter()
        .zip(&along)
        .map(|(w, &s)| {
            let alt = w.alt.unwrap_or_else(|| alt_at(s));
            let [x, y, z] = frame.to_enu(w.lat, w.lon, alt);
            EnuPoint::new(0.0, x, y, z)
        })
        .collect()
}

/// Resample a procedure to `len` points at evenly spaced times.
///
/// Radar-vector procedures that carry waypoint times are interpolated in
/// time directly, or taken as they are when there are exactly `len` of
/// them. Otherwise the spatial PCHIP path is timed by the mean
/// arc-length-aligned timing of the exemplar flights that pass within
/// `proximity_nm` of every waypoint, or at `default_speed_kts` when no
/// exemplar qualifies.
pub fn build_procedural_trajectory(
    proc: &Procedure,
    len: usize,
    exemplars: Option<&[EnuTrack]>,
    airspace: &AirspaceConfig,
    opts: &ProcedureOptions,
) -> Result<ProceduralTrajectory> {
    if len < 2 {
        return Err(Error::invalid("procedural trajectory length must be at least 2"));
    }
    proc.validate()?;
    if let (ProcedureKind::RadarVector, Some(times)) = (proc.kind, &proc.times) {
        return timed_waypoints(proc, times, len, airspace);
    }
    let path = ProceduralPath::new(proc, airspace)?;
    let profile = match (proc.kind, exemplars) {
        (ProcedureKind::Iap, Some(ex)) => exemplar_profile(&path, ex, nm_to_m(opts.proximity_nm)),
        _ => None,
    };
    let fractions = match profile {
        Some(p) => p.invert_uniform(len),
        None => {
            let duration = path.length_3d() / kts_to_mps(opts.default_speed_kts);
            (0..len)
                .map(|i| (i as f64 / (len - 1) as f64, duration * i as f64 / (len - 1) as f64))
                .collect()
        }
    };
    let points = fractions
        .into_iter()
        .map(|(u, t)| {
            let [x, y, z] = path.at_fraction(u);
            EnuPoint::new(t, x, y, z)
        })
        .collect();
    Ok(ProceduralTrajectory::from_points(proc.name.clone(), points))
}

fn timed_waypoints(
    proc: &Procedure,
    times: &[f64],
    len: usize,
    airspace: &AirspaceConfig,
) -> Result<ProceduralTrajectory> {
    let wps = waypoints_enu(proc, airspace);
    let t0 = times[0];
    let timed: Vec<EnuPoint> = wps
        .iter()
        .zip(times)
        .map(|(p, &t)| EnuPoint { t: t - t0, ..*p })
        .collect();
    let mut points = if timed.len() == len {
        timed
    } else {
        crate::preprocess::pchip_resample(&timed, len)?
    };
    if let Some(first) = points.first().map(|p| p.t) {
        for p in &mut points {
            p.t -= first;
        }
    }
    Ok(ProceduralTrajectory::from_points(proc.name.clone(), points))
}

/// Mean elapsed time as a function of arc-length fraction, tabulated on a
/// uniform grid. Non-decreasing.
struct TimingProfile {
    elapsed: Vec<f64>,
}

impl TimingProfile {
    /// Arc fraction and time for `len` evenly spaced instants.
    fn invert_uniform(&self, len: usize) -> Vec<(f64, f64)> {
        let g = self.elapsed.len();
        let total = self.elapsed[g - 1];
        (0..len)
            .map(|i| {
                let t = total * i as f64 / (len - 1) as f64;
                let k = self.elapsed.partition_point(|&e| e < t);
                let u = if k == 0 {
                    0.0
                } else if k >= g {
                    1.0
                } else {
                    let (e0, e1) = (self.elapsed[k - 1], self.elapsed[k]);
                    let s = if e1 > e0 { (t - e0) / (e1 - e0) } else { 0.0 };
                    ((k - 1) as f64 + s) / (g - 1) as f64
                };
                (u, t)
            })
            .collect()
    }
}

fn exemplar_profile(path: &ProceduralPath, exemplars: &[EnuTrack], proximity_m: f64) -> Option<TimingProfile> {
    let wps = path.waypoints();
    let mut sum = vec![0.0; PROFILE_GRID];
    let mut count = 0usize;
    for track in exemplars {
        let pts = &track.points;
        if pts.len() < 2 || !wps.iter().all(|w| distance_to_polyline(w, pts) <= proximity_m) {
            continue;
        }
        let nearest = |w: &EnuPoint| {
            (0..pts.len())
                .min_by(|&a, &b| pts[a].horizontal_dist(w).total_cmp(&pts[b].horizontal_dist(w)))
                .unwrap()
        };
        let (ia, ib) = (nearest(&wps[0]), nearest(&wps[wps.len() - 1]));
        if ib <= ia {
            continue;
        }
        // elapsed time against own normalized horizontal arc length,
        // keeping only strictly advancing samples
        let mut arc = vec![0.0];
        let mut elapsed = vec![0.0];
        let mut acc = 0.0;
        for k in ia + 1..=ib {
            acc += pts[k].horizontal_dist(&pts[k - 1]);
            if acc > *arc.last().unwrap() {
                arc.push(acc);
                elapsed.push(pts[k].t - pts[ia].t);
            }
        }
        if arc.len() < 2 {
            continue;
        }
        let total = acc;
        for (g, slot) in sum.iter_mut().enumerate() {
            let target = total * g as f64 / (PROFILE_GRID - 1) as f64;
            let k = arc.partition_point(|&a| a < target).clamp(1, arc.len() - 1);
            let (a0, a1) = (arc[k - 1], arc[k]);
            let s = ((target - a0) / (a1 - a0)).clamp(0.0, 1.0);
            *slot += elapsed[k - 1] + s * (elapsed[k] - elapsed[k - 1]);
        }
        count += 1;
    }
    if count == 0 {
        return None;
    }
    let elapsed: Vec<f64> = sum.into_iter().map(|s| s / count as f64).collect();
    if !(elapsed[PROFILE_GRID - 1] > 0.0) {
        return None;
    }
    Some(TimingProfile { elapsed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::enu_to_wgs84;
    use crate::procedures::Waypoint;
    use crate::trajectory::path_length;

    fn airspace() -> AirspaceConfig {
        AirspaceConfig::new(40.6413, -73.7781, 13.0)
    }

    fn proc_from_enu(name: &str, kind: ProcedureKind, pts: &[[f64; 3]]) -> Procedure {
        let a = airspace();
        Procedure {
            name: name.into(),
            kind,
            waypoints: pts
                .iter()
                .map(|p| {
                    let (lat, lon, alt) = enu_to_wgs84(*p, &a);
                    Waypoint { lat, lon, alt: Some(alt) }
                })
                .collect(),
            frequency: 1.0,
            times: None,
            runway: None,
        }
    }

    #[test]
    fn two_waypoints_give_equal_spacing_and_uniform_times() {
        let p = proc_from_enu("p", ProcedureKind::Iap, &[[0.0, 0.0, 900.0], [8000.0, 6000.0, 300.0]]);
        let tr = build_procedural_trajectory(&p, 5, None, &airspace(), &ProcedureOptions::default()).unwrap();
        assert_eq!(tr.len(), 5);
        let steps: Vec<f64> = tr.points.windows(2).map(|w| w[0].dist(&w[1])).collect();
        for s in &steps {
            assert!((s - steps[0]).abs() < 1e-3, "{steps:?}");
        }
        let dts: Vec<f64> = tr.points.windows(2).map(|w| w[1].t - w[0].t).collect();
        for d in &dts {
            assert!((d - dts[0]).abs() < 1e-9);
        }
        // collinear: cross product of first and last steps ~ 0
        let (a, b, c) = (tr.points[0], tr.points[2], tr.points[4]);
        let cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        assert!(cross.abs() < 1e-3 * 1e7);
        assert_eq!(tr.points[0].t, 0.0);
        let speed = tr.total_distance / tr.duration();
        assert!((speed - kts_to_mps(140.0)).abs() < 1e-3);
    }

    #[test]
    fn monotone_waypoints_give_monotone_samples() {
        let p = proc_from_enu(
            "p",
            ProcedureKind::Iap,
            &[[0.0, 0.0, 0.0], [3000.0, 5000.0, 0.0], [4000.0, 9000.0, 0.0], [9000.0, 9500.0, 0.0]],
        );
        let tr = build_procedural_trajectory(&p, 200, None, &airspace(), &ProcedureOptions::default()).unwrap();
        for w in tr.points.windows(2) {
            assert!(w[1].x >= w[0].x - 1e-6);
        }
    }

    #[test]
    fn path_passes_through_waypoints() {
        let pts = [[-20_000.0, 5000.0, 3000.0], [-10_000.0, 9000.0, 2000.0], [0.0, 4000.0, 1000.0], [3000.0, 0.0, 100.0]];
        let p = proc_from_enu("p", ProcedureKind::Iap, &pts);
        let path = ProceduralPath::new(&p, &airspace()).unwrap();
        for (s, w) in path.knots().iter().zip(path.waypoints()) {
            let q = path.eval(*s);
            assert!((q[0] - w.x).hypot(q[1] - w.y).hypot(q[2] - w.z) < 1e-6);
        }
        let tr = build_procedural_trajectory(&p, 3000, None, &airspace(), &ProcedureOptions::default()).unwrap();
        for w in path.waypoints() {
            let d = tr.points.iter().map(|q| q.dist(w)).fold(f64::INFINITY, f64::min);
            assert!(d < 10.0, "{d}");
            assert!(distance_to_polyline(w, &tr.points) < 1.0);
        }
        let straight = tr.points[0].dist(tr.points.last().unwrap());
        assert!(tr.total_distance >= straight);
        assert!((tr.total_distance - path_length(&tr.points)).abs() < 1e-9);
    }

    #[test]
    fn exemplar_timing_is_the_mean_of_exemplars() {
        // straight 10 km approach; exemplars fly it at 60, 70 and 80 m/s
        let p = proc_from_enu("p", ProcedureKind::Iap, &[[-10_000.0, 0.0, 600.0], [0.0, 0.0, 0.0]]);
        let exemplars: Vec<EnuTrack> = [60.0, 70.0, 80.0]
            .iter()
            .map(|&v| {
                let n = 101;
                let dur = 10_000.0 / v;
                EnuTrack {
                    id: format!("v{v}"),
                    start_time: 0.0,
                    points: (0..n)
                        .map(|i| {
                            let s = i as f64 / (n - 1) as f64;
                            EnuPoint::new(dur * s, -10_000.0 + 10_000.0 * s, 30.0, 600.0 * (1.0 - s))
                        })
                        .collect(),
                    runway: None,
                }
            })
            .collect();
        let tr = build_procedural_trajectory(&p, 11, Some(&exemplars), &airspace(), &ProcedureOptions::default())
            .unwrap();
        let expected = (10_000.0 / 60.0 + 10_000.0 / 70.0 + 10_000.0 / 80.0) / 3.0;
        assert!((tr.duration() - expected).abs() < 1e-6, "{} vs {expected}", tr.duration());
        // every exemplar is at constant speed, so the mean profile is linear
        // and samples are equally spaced
        let steps: Vec<f64> = tr.points.windows(2).map(|w| w[0].horizontal_dist(&w[1])).collect();
        for s in &steps {
            assert!((s - 1000.0).abs() < 1.0, "{steps:?}");
        }
    }

    #[test]
    fn far_exemplars_fall_back_to_constant_speed() {
        let p = proc_from_enu("p", ProcedureKind::Iap, &[[-10_000.0, 0.0, 600.0], [0.0, 0.0, 0.0]]);
        let far = EnuTrack {
            id: "far".into(),
            start_time: 0.0,
            points: vec![EnuPoint::new(0.0, -10_000.0, 5000.0, 0.0), EnuPoint::new(100.0, 0.0, 5000.0, 0.0)],
            runway: None,
        };
        let tr = build_procedural_trajectory(&p, 5, Some(&[far]), &airspace(), &ProcedureOptions::default()).unwrap();
        let expected = tr.total_distance / kts_to_mps(140.0);
        assert!((tr.duration() - expected).abs() / expected < 1e-3);
    }

    #[test]
    fn timed_radar_vector_keeps_its_times() {
        let mut p = proc_from_enu("rv", ProcedureKind::RadarVector, &[[0.0, 0.0, 0.0], [1000.0, 0.0, 0.0], [2000.0, 0.0, 0.0]]);
        p.times = Some(vec![50.0, 60.0, 70.0]);
        let tr = build_procedural_trajectory(&p, 5, None, &airspace(), &ProcedureOptions::default()).unwrap();
        let ts: Vec<f64> = tr.points.iter().map(|q| q.t).collect();
        assert_eq!(ts, vec![0.0, 5.0, 10.0, 15.0, 20.0]);
        assert!((tr.points[2].x - 1000.0).abs() < 1e-3);
    }

    #[test]
    fn bad_lengths_are_errors() {
        let p = proc_from_enu("p", ProcedureKind::Iap, &[[0.0, 0.0, 0.0], [1000.0, 0.0, 0.0]]);
        assert!(build_procedural_trajectory(&p, 1, None, &airspace(), &ProcedureOptions::default()).is_err());
        let mut short = p.clone();
        short.waypoints.truncate(1);
        assert!(build_procedural_trajectory(&short, 5, None, &airspace(), &ProcedureOptions::default()).is_err());
    }
}
