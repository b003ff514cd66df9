use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DVector;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{BlockSource, PairwiseModels, SceneParams};
use crate::error::{Error, Result};
use crate::ingest::EnuPoint;
use crate::preprocess::{reconstruct_trajectory, sidecar_path, DeviationVector};
use crate::procedures::ProceduralTrajectory;
use crate::rng::Rng;
use crate::single_model::Generator;

/// Draws allowed before a scene with negative inter-arrival times (or
/// non-positive transit times) is reported as a failure.
pub const MAX_DELTA_ATTEMPTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneTrajectory {
    pub procedure: String,
    pub points: Vec<EnuPoint>,
}

/// Aircraft on one clock; aircraft `i + 1` arrives `inter_arrival_times[i]`
/// seconds after aircraft `i`, and the first arrives at time 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficScene {
    pub trajectories: Vec<SceneTrajectory>,
    pub inter_arrival_times: Vec<f64>,
    pub provenance: Vec<BlockSource>,
}

impl TrafficScene {
    pub fn point_sets(&self) -> Vec<Vec<EnuPoint>> {
        self.trajectories.iter().map(|t| t.points.clone()).collect()
    }
}

/// Shift each trajectory so that it ends at its arrival time.
fn align(trajs: Vec<(String, Vec<EnuPoint>)>, deltas: &[f64]) -> Vec<SceneTrajectory> {
    let mut arrival = 0.0;
    trajs
        .into_iter()
        .enumerate()
        .map(|(i, (procedure, pts))| {
            if i > 0 {
                arrival += deltas[i - 1];
            }
            let end = pts.last().map_or(0.0, |p| p.t);
            SceneTrajectory {
                procedure,
                points: pts.into_iter().map(|p| EnuPoint { t: p.t - end + arrival, ..p }).collect(),
            }
        })
        .collect()
}

/// Draw a scene from assembled parameters, reconstructing each aircraft
/// against its whole-arrival procedural trajectory.
pub fn generate_scene(params: &SceneParams, procedurals: &[&ProceduralTrajectory], rng: &mut Rng) -> Result<TrafficScene> {
    let n_ac = params.n_aircraft();
    if procedurals.len() != n_ac {
        return Err(Error::Dimension {
            expected: n_ac,
            got: procedurals.len(),
        });
    }
    let d = params.tau_dim;
    for p in procedurals {
        if 3 * p.len() + 2 != d {
            return Err(Error::Dimension {
                expected: d,
                got: 3 * p.len() + 2,
            });
        }
    }
    for _ in 0..MAX_DELTA_ATTEMPTS {
        let z = DVector::from_fn(params.factor.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = &params.mean + &params.factor * z;
        let deltas: Vec<f64> = (0..n_ac - 1).map(|i| x[params.delta_index(i)]).collect();
        if deltas.iter().any(|&v| v < 0.0) {
            continue;
        }
        let taus: Vec<DeviationVector> = (0..n_ac)
            .map(|i| DeviationVector::from_slice(&x.as_slice()[params.tau_offset(i)..params.tau_offset(i) + d]))
            .collect::<Result<_>>()?;
        if taus.iter().any(|t| !(t.transit_time > 0.0 && t.total_distance > 0.0)) {
            continue;
        }
        let trajs = taus
            .iter()
            .zip(procedurals)
            .zip(&params.procedures)
            .map(|((tau, proc), name)| Ok((name.clone(), reconstruct_trajectory(tau, proc)?)))
            .collect::<Result<Vec<_>>>()?;
        return Ok(TrafficScene {
            trajectories: align(trajs, &deltas),
            inter_arrival_times: deltas,
            provenance: params.provenance.clone(),
        });
    }
    Err(Error::numerical(format!(
        "{MAX_DELTA_ATTEMPTS} consecutive scene draws had a negative inter-arrival time or transit time"
    )))
}

/// Reference scene without inter-aircraft correlation: each aircraft is
/// drawn by the single-trajectory generator on its procedure (an index
/// into the generator's radar vectors), and each inter-arrival time from
/// the marginal of `δ` under the pairwise model of its procedure pair.
pub fn generate_independent_scene(
    generator: &Generator,
    models: &PairwiseModels,
    procedures: &[(usize, String)],
    rng: &mut Rng,
) -> Result<TrafficScene> {
    if procedures.is_empty() {
        return Err(Error::invalid("a scene needs at least one aircraft"));
    }
    let mut gaps = Vec::with_capacity(procedures.len() - 1);
    for w in procedures.windows(2) {
        let mut gap = None;
        for _ in 0..MAX_DELTA_ATTEMPTS {
            let d = models.sample_delta(&w[0].1, &w[1].1, rng)?;
            if d >= 0.0 {
                gap = Some(d);
                break;
            }
        }
        gaps.push(gap.ok_or_else(|| {
            Error::numerical(format!("{MAX_DELTA_ATTEMPTS} consecutive negative inter-arrival times"))
        })?);
    }
    let trajs = procedures
        .iter()
        .map(|(i, _)| generator.generate_on(*i, rng).map(|t| (t.procedure, t.points)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrafficScene {
        trajectories: align(trajs, &gaps),
        inter_arrival_times: gaps,
        provenance: Vec::new(),
    })
}

#[derive(Serialize)]
struct SceneMeta<'a> {
    scene_id: usize,
    procedures: Vec<&'a str>,
    inter_arrival_times: &'a [f64],
    components: &'a [BlockSource],
}

#[derive(Serialize)]
struct SceneFileMeta<'a> {
    seed: u64,
    count: usize,
    scenes: Vec<SceneMeta<'a>>,
}

/// Write `scene_id,aircraft_idx,t,x,y,z` rows and a `<path>.meta.json`
/// sidecar.
pub fn write_scenes(path: impl AsRef<Path>, scenes: &[TrafficScene], seed: u64) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("scene_id,aircraft_idx,t,x,y,z\n");
    for (s, scene) in scenes.iter().enumerate() {
        for (a, tr) in scene.trajectories.iter().enumerate() {
            for p in &tr.points {
                out.push_str(&format!("{s},{a},{},{},{},{}\n", p.t, p.x, p.y, p.z));
            }
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))?;
    let meta = SceneFileMeta {
        seed,
        count: scenes.len(),
        scenes: scenes
            .iter()
            .enumerate()
            .map(|(scene_id, s)| SceneMeta {
                scene_id,
                procedures: s.trajectories.iter().map(|t| t.procedure.as_str()).collect(),
                inter_arrival_times: &s.inter_arrival_times,
                components: &s.provenance,
            })
            .collect(),
    };
    let meta_path = sidecar_path(path);
    std::fs::write(&meta_path, serde_json::to_string_pretty(&meta).expect("meta serializes"))
        .map_err(|e| Error::io(&meta_path, e))
}

/// Read a scene file into point lists per scene and aircraft, in id order.
pub fn read_scenes(path: impl AsRef<Path>) -> Result<Vec<Vec<Vec<EnuPoint>>>> {
    let path = path.as_ref();
    let bad = |line: usize| Error::Parse(format!("{}: bad value on row {line}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let mut out: BTreeMap<u64, BTreeMap<u64, Vec<EnuPoint>>> = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let int = |k: usize| rec.get(k).and_then(|s| s.parse::<u64>().ok()).ok_or_else(|| bad(i + 2));
        let num = |k: usize| rec.get(k).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| bad(i + 2));
        out.entry(int(0)?)
            .or_default()
            .entry(int(1)?)
            .or_default()
            .push(EnuPoint::new(num(2)?, num(3)?, num(4)?, num(5)?));
    }
    Ok(out.into_values().map(|s| s.into_values().collect()).collect())
}
