//! Ground-truth traffic generator: arrivals along known radar-vector
//! routes onto a straight-in approach, with latent-factor deviations, plus
//! departures and overflights. Used for end-to-end tests, benchmarks and
//! demos.

use rand::Rng as _;
use rand_distr::{Distribution, Exp, Normal};

use crate::error::{Error, Result};
use crate::ingest::{AirspaceConfig, EnuPoint, Flight, FlightClass, TrackPoint};
use crate::procedures::{ProceduralPath, Procedure, ProcedureKind, Waypoint};
use crate::rng::Rng;
use crate::trajectory::position_at;
use crate::units::{m_to_ft, nm_to_m};

const ROUTE_SAMPLES: usize = 400;
const IAP_SAMPLES: usize = 300;
const LEAD_IN_M: f64 = 12_000.0;

#[derive(Debug, Clone)]
pub struct SyntheticWorld {
    pub airspace: AirspaceConfig,
    pub iap: Procedure,
    /// Radar-vector routes ending at the first approach waypoint; their
    /// frequencies are the route probabilities.
    pub routes: Vec<Procedure>,
}

fn procedure(airspace: &AirspaceConfig, name: &str, kind: ProcedureKind, freq: f64, enu_ft: &[[f64; 3]]) -> Procedure {
    let frame = airspace.frame();
    Procedure {
        name: name.into(),
        kind,
        waypoints: enu_ft
            .iter()
            .map(|&[x, y, alt_ft]| {
                // place horizontally at the reference altitude, keep the
                // altitude constraint exact
                let (lat, lon, _) = frame.to_geodetic([x, y, 0.0]);
                Waypoint { lat, lon, alt: Some(alt_ft) }
            })
            .collect(),
        frequency: freq,
        times: None,
        runway: Some("09".into()),
    }
}

impl SyntheticWorld {
    /// A single easterly runway at the reference point with a 12 NM
    /// straight-in approach fed by three routes (west, north, south).
    pub fn standard() -> Self {
        let airspace = AirspaceConfig::new(40.6413, -73.7781, 13.0);
        let iap = procedure(
            &airspace,
            "ILS09",
            ProcedureKind::Iap,
            1.0,
            &[[-22_000.0, 0.0, 3800.0], [-11_000.0, 0.0, 1950.0], [-400.0, 0.0, 80.0]],
        );
        let routes = vec![
            procedure(
                &airspace,
                "WEST",
                ProcedureKind::RadarVector,
                0.5,
                &[[-44_500.0, 9_000.0, 10_000.0], [-36_000.0, 4_000.0, 7_000.0], [-22_000.0, 0.0, 3800.0]],
            ),
            procedure(
                &airspace,
                "NORTH",
                ProcedureKind::RadarVector,
                0.3,
                &[[4_000.0, 44_500.0, 11_000.0], [-4_000.0, 27_000.0, 8_500.0], [-20_000.0, 15_000.0, 6_000.0], [-32_000.0, 6_000.0, 4_500.0], [-22_000.0, 0.0, 3800.0]],
            ),
            procedure(
                &airspace,
                "SOUTH",
                ProcedureKind::RadarVector,
                0.2,
                &[[-8_000.0, -44_500.0, 11_000.0], [-14_000.0, -26_000.0, 8_000.0], [-30_000.0, -8_000.0, 4_800.0], [-22_000.0, 0.0, 3800.0]],
            ),
        ];
        SyntheticWorld { airspace, iap, routes }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusOptions {
    pub arrivals: usize,
    pub departures: usize,
    pub overflights: usize,
    /// Surveillance update interval, seconds.
    pub sample_interval_s: f64,
    /// Mean of the exponential part of the landing gap, seconds.
    pub mean_gap_s: f64,
    /// Smallest landing gap, seconds.
    pub min_gap_s: f64,
    /// When set, landing times are pushed back until each arrival keeps
    /// this horizontal distance from every earlier one.
    pub min_separation_nm: Option<f64>,
    /// Time of the first landing.
    pub start_time: f64,
    /// Probability that an arrival repeats the speed flow of the one
    /// before it; 0 draws every flow independently.
    pub flow_persistence: f64,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            arrivals: 100,
            departures: 0,
            overflights: 0,
            sample_interval_s: 5.0,
            mean_gap_s: 60.0,
            min_gap_s: 45.0,
            min_separation_nm: Some(3.5),
            start_time: 1_000.0,
            flow_persistence: 0.0,
        }
    }
}

/// A generated arrival in ENU with its route and latent flow component.
#[derive(Debug, Clone)]
pub struct TruthArrival {
    pub route: usize,
    pub flow: usize,
    /// Times relative to the landing instant (the last point is at 0).
    pub points: Vec<EnuPoint>,
}

fn categorical(weights: &[f64], rng: &mut Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

fn normal(rng: &mut Rng, mean: f64, sd: f64) -> f64 {
    Normal::new(mean, sd).expect("valid normal").sample(rng)
}

/// Unit left normal of the path direction at fraction `u`.
fn left_normal(path: &ProceduralPath, u: f64) -> [f64; 2] {
    let (a, b) = ((u - 1e-3).max(0.0), (u + 1e-3).min(1.0));
    let (p, q) = (path.at_fraction(a), path.at_fraction(b));
    let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
    let n = dx.hypot(dy).max(1e-9);
    [-dy / n, dx / n]
}

struct Paths {
    routes: Vec<ProceduralPath>,
    iap: ProceduralPath,
}

fn paths(world: &SyntheticWorld) -> Result<Paths> {
    Ok(Paths {
        routes: world
            .routes
            .iter()
            .map(|r| ProceduralPath::new(r, &world.airspace))
            .collect::<Result<_>>()?,
        iap: ProceduralPath::new(&world.iap, &world.airspace)?,
    })
}

/// One arrival: a lead-in from outside the airspace, the route with a
/// lateral and vertical offset that fades out at the approach, then the
/// approach with a small fading offset. Speeds fall linearly along each
/// part and scale with the flow's speed factor.
fn arrival(p: &Paths, world: &SyntheticWorld, rng: &mut Rng, interval: f64, keep_flow: Option<usize>) -> TruthArrival {
    let weights: Vec<f64> = world.routes.iter().map(|r| r.frequency).collect();
    let route = categorical(&weights, rng);
    let fresh = usize::from(rng.random::<f64>() >= 0.6);
    let flow = keep_flow.unwrap_or(fresh);
    let (speed, lateral) = if flow == 0 {
        (normal(rng, 1.0, 0.04), normal(rng, 0.0, 700.0))
    } else {
        (normal(rng, 0.87, 0.035), normal(rng, 1_800.0, 600.0))
    };
    let vertical = normal(rng, 0.0, 120.0);
    let modes: Vec<(f64, f64)> = (1..=3)
        .map(|m| (normal(rng, 0.0, 250.0 / m as f64), normal(rng, 0.0, 40.0 / m as f64)))
        .collect();
    let final_speed = 1.0 + 0.6 * (speed - 1.0) + normal(rng, 0.0, 0.02);
    let final_lateral = normal(rng, 0.0, 120.0);

    let path = &p.routes[route];
    let mut dense: Vec<([f64; 3], f64)> = Vec::with_capacity(ROUTE_SAMPLES + IAP_SAMPLES + 64);
    // lead-in: straight back along the initial course
    let start = path.at_fraction(0.0);
    let n0 = left_normal(path, 0.0);
    let dir = [n0[1], -n0[0]];
    let lead_n = 60;
    for i in 0..lead_n {
        let back = LEAD_IN_M * (1.0 - i as f64 / lead_n as f64);
        let off = lateral;
        dense.push((
            [
                start[0] - dir[0] * back + n0[0] * off,
                start[1] - dir[1] * back + n0[1] * off,
                start[2] + vertical + back * 0.02,
            ],
            135.0 * speed,
        ));
    }
    for i in 0..=ROUTE_SAMPLES {
        let u = i as f64 / ROUTE_SAMPLES as f64;
        let q = path.at_fraction(u);
        let n = left_normal(path, u);
        let fade = (1.0 - u) * (1.0 - u);
        let wiggle: f64 = modes.iter().enumerate().map(|(m, (a, _))| a * ((m + 1) as f64 * std::f64::consts::PI * u).sin()).sum();
        let bump: f64 = modes.iter().enumerate().map(|(m, (_, b))| b * ((m + 1) as f64 * std::f64::consts::PI * u).sin()).sum();
        let off = lateral * fade + wiggle;
        dense.push(([q[0] + n[0] * off, q[1] + n[1] * off, q[2] + vertical * (1.0 - u) + bump], speed * (135.0 - 40.0 * u)));
    }
    for i in 1..=IAP_SAMPLES {
        let u = i as f64 / IAP_SAMPLES as f64;
        let q = p.iap.at_fraction(u);
        let n = left_normal(&p.iap, u);
        let off = final_lateral * (1.0 - u).powi(2);
        dense.push(([q[0] + n[0] * off, q[1] + n[1] * off, q[2]], final_speed * (95.0 - 27.0 * u)));
    }
    // integrate time along the horizontal path
    let mut timed = Vec::with_capacity(dense.len());
    let mut t = 0.0;
    for (i, (pos, v)) in dense.iter().enumerate() {
        if i > 0 {
            let (prev, pv) = dense[i - 1];
            let ds = (pos[0] - prev[0]).hypot(pos[1] - prev[1]);
            t += ds / (0.5 * (v + pv));
        }
        timed.push(EnuPoint::new(t, pos[0], pos[1], pos[2]));
    }
    let end = t;
    let n_samples = (end / interval).floor() as usize;
    let mut points: Vec<EnuPoint> = (0..=n_samples)
        .map(|k| {
            let tk = end - (n_samples - k) as f64 * interval;
            let q = position_at(&timed, tk).expect("inside span");
            EnuPoint::new(tk - end, q[0], q[1], q[2])
        })
        .collect();
    if points.len() < 2 {
        points = vec![EnuPoint { t: -end, ..timed[0] }, EnuPoint { t: 0.0, ..timed[timed.len() - 1] }];
    }
    TruthArrival { route, flow, points }
}

fn min_horizontal(a: &[EnuPoint], a_end: f64, b: &[EnuPoint], b_end: f64, step: f64) -> f64 {
    let lo = (a[0].t + a_end).max(b[0].t + b_end);
    let hi = a_end.min(b_end);
    let mut best = f64::INFINITY;
    let mut t = lo;
    while t <= hi {
        if let (Some(p), Some(q)) = (position_at(a, t - a_end), position_at(b, t - b_end)) {
            best = best.min((p[0] - q[0]).hypot(p[1] - q[1]));
        }
        t += step;
    }
    best
}

/// Arrivals in landing order with their landing times.
pub fn generate_arrivals(world: &SyntheticWorld, opts: &CorpusOptions, rng: &mut Rng) -> Result<Vec<(f64, TruthArrival)>> {
    if !(opts.sample_interval_s > 0.0) {
        return Err(Error::invalid("sample interval must be positive"));
    }
    let p = paths(world)?;
    let gap = Exp::new(1.0 / opts.mean_gap_s.max(1e-9)).map_err(|e| Error::invalid(e.to_string()))?;
    let mut out: Vec<(f64, TruthArrival)> = Vec::with_capacity(opts.arrivals);
    let mut landing = opts.start_time;
    for i in 0..opts.arrivals {
        let keep = rng.random::<f64>() < opts.flow_persistence;
        let prev = out.last().filter(|_| keep).map(|(_, b)| b.flow);
        let a = arrival(&p, world, rng, opts.sample_interval_s, prev);
        if i > 0 {
            landing += opts.min_gap_s + gap.sample(rng);
        }
        if let Some(sep) = opts.min_separation_nm {
            let sep_m = nm_to_m(sep);
            for _ in 0..400 {
                let start = landing + a.points[0].t;
                let close = out
                    .iter()
                    .rev()
                    .take_while(|(e, _)| *e > start - 3600.0)
                    .filter(|(e, _)| *e > start)
                    .any(|(e, b)| min_horizontal(&a.points, landing, &b.points, *e, 2.0) < sep_m);
                if !close {
                    break;
                }
                landing += 2.0;
            }
        }
        out.push((landing, a));
    }
    Ok(out)
}

fn to_flight(id: String, points: &[EnuPoint], offset: f64, airspace: &AirspaceConfig) -> Flight {
    let frame = airspace.frame();
    Flight {
        id,
        points: points
            .iter()
            .map(|q| {
                let (lat, lon, alt) = frame.to_geodetic([q.x, q.y, q.z]);
                TrackPoint::new(q.t + offset, lat, lon, alt)
            })
            .collect(),
        class: None,
        runway: None,
    }
}

fn straight(from: [f64; 3], to: [f64; 3], speed: f64, interval: f64) -> Vec<EnuPoint> {
    let d = (to[0] - from[0]).hypot(to[1] - from[1]);
    let n = ((d / speed) / interval).floor().max(1.0) as usize;
    (0..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            EnuPoint::new(
                k as f64 * interval,
                from[0] + s * (to[0] - from[0]),
                from[1] + s * (to[1] - from[1]),
                from[2] + s * (to[2] - from[2]),
            )
        })
        .collect()
}

/// Geodetic flights: arrivals (ids `A…`), departures (`D…`) and
/// overflights (`O…`), each with its true class set. Departures and
/// overflights are spread over the arrival period.
pub fn generate_corpus(world: &SyntheticWorld, opts: &CorpusOptions, rng: &mut Rng) -> Result<Vec<Flight>> {
    let arrivals = generate_arrivals(world, opts, rng)?;
    let span_end = arrivals.last().map_or(opts.start_time + 3600.0, |a| a.0);
    let mut flights = Vec::with_capacity(opts.arrivals + opts.departures + opts.overflights);
    for (i, (landing, a)) in arrivals.iter().enumerate() {
        let mut f = to_flight(format!("A{i:05}"), &a.points, *landing, &world.airspace);
        f.class = Some(FlightClass::Arrival);
        flights.push(f);
    }
    let far = world.airspace.radius_m() + 8_000.0;
    for i in 0..opts.departures {
        let bearing = rng.random_range(0.0..std::f64::consts::TAU);
        let pts = straight(
            [300.0, 0.0, 10.0],
            [far * bearing.cos(), far * bearing.sin(), 4_500.0],
            110.0,
            opts.sample_interval_s,
        );
        let t0 = rng.random_range(opts.start_time..span_end.max(opts.start_time + 1.0));
        let mut f = to_flight(format!("D{i:05}"), &pts, t0, &world.airspace);
        f.class = Some(FlightClass::Departure);
        flights.push(f);
    }
    for i in 0..opts.overflights {
        let bearing = rng.random_range(0.0..std::f64::consts::TAU);
        let miss = rng.random_range(8_000.0..25_000.0);
        let (c, s) = (bearing.cos(), bearing.sin());
        let from = [-far * c - miss * s, -far * s + miss * c, 3_800.0];
        let to = [far * c - miss * s, far * s + miss * c, 3_800.0];
        let pts = straight(from, to, 210.0, opts.sample_interval_s);
        let t0 = rng.random_range(opts.start_time..span_end.max(opts.start_time + 1.0));
        let mut f = to_flight(format!("O{i:05}"), &pts, t0, &world.airspace);
        f.class = Some(FlightClass::Overflight);
        flights.push(f);
    }
    Ok(flights)
}

/// Feet above the reference point for an ENU height.
pub fn height_ft(z: f64) -> f64 {
    m_to_ft(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::classify_flight;
    use crate::rng::seeded;

    #[test]
    fn classes_match_the_classifier() {
        let world = SyntheticWorld::standard();
        let opts = CorpusOptions {
            arrivals: 30,
            departures: 10,
            overflights: 10,
            ..Default::default()
        };
        let flights = generate_corpus(&world, &opts, &mut seeded(1)).unwrap();
        assert_eq!(flights.len(), 50);
        for f in &flights {
            assert_eq!(classify_flight(f, &world.airspace).unwrap(), f.class.unwrap(), "{}", f.id);
        }
    }

    #[test]
    fn scheduled_arrivals_keep_separation() {
        let world = SyntheticWorld::standard();
        let opts = CorpusOptions {
            arrivals: 40,
            ..Default::default()
        };
        let arr = generate_arrivals(&world, &opts, &mut seeded(3)).unwrap();
        for w in arr.windows(2) {
            assert!(w[1].0 > w[0].0);
        }
        let sep = nm_to_m(3.5);
        for i in 0..arr.len() {
            for j in 0..i {
                let d = min_horizontal(&arr[i].1.points, arr[i].0, &arr[j].1.points, arr[j].0, 2.0);
                assert!(d >= sep * 0.99, "{i} {j} {d}");
            }
        }
    }

    #[test]
    fn arrivals_end_at_the_threshold() {
        let world = SyntheticWorld::standard();
        let arr = generate_arrivals(&world, &CorpusOptions { arrivals: 5, ..Default::default() }, &mut seeded(2)).unwrap();
        for (_, a) in &arr {
            let last = a.points.last().unwrap();
            assert_eq!(last.t, 0.0);
            assert!(last.x.hypot(last.y) < 1_000.0);
            assert!(height_ft(last.z) < 200.0);
            assert!(a.points[0].x.hypot(a.points[0].y) > world.airspace.radius_m());
        }
    }
}
