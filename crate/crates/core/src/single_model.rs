//! Per-segment mixture models and single-aircraft trajectory generation
//! with conditional stitching of the final approach onto the radar-vector
//! segment.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::EnuPoint;
use crate::metrics::silhouette_score;
use crate::mixture::{em_fit, Conditioner, EmOptions, MixtureModel, SegmentKind};
use crate::mixture::io::ModelDoc;
use crate::preprocess::{deviation_dim, reconstruct_trajectory, DeviationVector};
use crate::procedures::ProceduralTrajectory;
use crate::rng::Rng;

pub const SINGLE_MODEL_FORMAT: &str = "termtraj-single-model/1";
pub const DEFAULT_N_OVERLAP: usize = 10;
/// Attempts per trajectory before a generation failure is reported.
pub const MAX_ATTEMPTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentLengths {
    pub t_v: usize,
    pub t_f: usize,
    pub n_overlap: usize,
}

impl SegmentLengths {
    pub fn validate(&self) -> Result<()> {
        if self.t_v < 2 || self.t_f < 2 {
            return Err(Error::invalid("segment lengths must be at least 2"));
        }
        if self.n_overlap == 0 || self.n_overlap > self.t_v || self.n_overlap >= self.t_f {
            return Err(Error::invalid(format!(
                "overlap {} must be in 1..=min(T_v, T_f - 1)",
                self.n_overlap
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleTrajectoryModel {
    pub radar_vector: MixtureModel,
    pub final_approach: MixtureModel,
    pub lengths: SegmentLengths,
}

/// Summary of one segment fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub segment: SegmentKind,
    pub rows: usize,
    pub k: usize,
    pub rank: usize,
    pub converged: bool,
    /// EM objective (penalized log-likelihood) after each iteration.
    pub log_likelihood: Vec<f64>,
    /// Silhouette of the fitted hard labels (absent for one component or
    /// when every row lands in one component).
    pub silhouette: Option<f64>,
}

/// EM at `k` components followed by per-component compression to `rank`.
pub fn train_segment(
    data: &DMatrix<f64>,
    k: usize,
    rank: usize,
    segment: SegmentKind,
    opts: &EmOptions,
    rng: &mut Rng,
) -> Result<(MixtureModel, SegmentReport)> {
    let fit = em_fit(data, k, segment, opts, rng)?;
    let model = fit.model.compressed(rank)?;
    let silhouette = if k >= 2 { silhouette_score(data, &fit.labels).ok() } else { None };
    let report = SegmentReport {
        segment,
        rows: data.nrows(),
        k,
        rank: rank.min(data.ncols()),
        converged: fit.converged,
        log_likelihood: fit.log_likelihood,
        silhouette,
    };
    Ok((model, report))
}

/// Segment training settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentSettings {
    pub k: usize,
    pub rank: usize,
}

pub fn train(
    radar_vector: &DMatrix<f64>,
    final_approach: &DMatrix<f64>,
    rv: SegmentSettings,
    fa: SegmentSettings,
    lengths: SegmentLengths,
    opts: &EmOptions,
    rng: &mut Rng,
) -> Result<(SingleTrajectoryModel, Vec<SegmentReport>)> {
    lengths.validate()?;
    for (data, t) in [(radar_vector, lengths.t_v), (final_approach, lengths.t_f)] {
        if data.nrows() == 0 {
            return Err(Error::invalid("empty training dataset"));
        }
        if data.ncols() != deviation_dim(t) {
            return Err(Error::Dimension {
                expected: deviation_dim(t),
                got: data.ncols(),
            });
        }
    }
    let (rv_model, rv_report) = train_segment(radar_vector, rv.k, rv.rank, SegmentKind::RadarVector, opts, rng)?;
    let (fa_model, fa_report) = train_segment(final_approach, fa.k, fa.rank, SegmentKind::FinalApproach, opts, rng)?;
    Ok((
        SingleTrajectoryModel {
            radar_vector: rv_model,
            final_approach: fa_model,
            lengths,
        },
        vec![rv_report, fa_report],
    ))
}

#[derive(Serialize, Deserialize)]
struct SingleModelDoc {
    format: String,
    lengths: SegmentLengths,
    radar_vector: ModelDoc,
    final_approach: ModelDoc,
}

impl SingleTrajectoryModel {
    pub fn to_json(&self) -> String {
        let doc = SingleModelDoc {
            format: SINGLE_MODEL_FORMAT.into(),
            lengths: self.lengths,
            radar_vector: ModelDoc::from_model(&self.radar_vector),
            final_approach: ModelDoc::from_model(&self.final_approach),
        };
        serde_json::to_string(&doc).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SingleModelDoc = serde_json::from_str(text).map_err(|e| Error::Parse(format!("model file: {e}")))?;
        if doc.format != SINGLE_MODEL_FORMAT {
            return Err(Error::Parse(format!("unsupported model format `{}`", doc.format)));
        }
        let model = SingleTrajectoryModel {
            radar_vector: doc.radar_vector.into_model()?,
            final_approach: doc.final_approach.into_model()?,
            lengths: doc.lengths,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        self.lengths.validate()?;
        for (m, t) in [(&self.radar_vector, self.lengths.t_v), (&self.final_approach, self.lengths.t_f)] {
            if m.dimension != deviation_dim(t) {
                return Err(Error::Dimension {
                    expected: deviation_dim(t),
                    got: m.dimension,
                });
            }
        }
        Ok(())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Procedures available at generation time.
#[derive(Debug, Clone)]
pub struct TestProcedures {
    /// Radar-vector procedural trajectories (length `T_v`) with their
    /// relative frequencies.
    pub radar_vectors: Vec<(ProceduralTrajectory, f64)>,
    /// Final-approach procedural trajectory (length `T_f`).
    pub iap: ProceduralTrajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTrajectory {
    pub points: Vec<EnuPoint>,
    pub procedure: String,
    /// Radar-vector and final-approach component indices.
    pub components: (usize, usize),
    /// Deviations of the radar-vector tail from the approach head that the
    /// final-approach model was conditioned on.
    pub conditioning: Vec<f64>,
}

/// Index drawn with probability proportional to `weights`.
pub(crate) fn categorical(weights: &[f64], rng: &mut Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = i;
            if u < w {
                return i;
            }
            u -= w;
        }
    }
    last
}

/// Reusable single-trajectory generator.
pub struct Generator<'a> {
    model: &'a SingleTrajectoryModel,
    procs: &'a TestProcedures,
    /// One per radar-vector component, absorbing that component's
    /// isotropic noise in the conditioning values.
    conditioners: Vec<Conditioner>,
    observed: Vec<usize>,
}

impl<'a> Generator<'a> {
    pub fn new(model: &'a SingleTrajectoryModel, procs: &'a TestProcedures) -> Result<Self> {
        model.validate()?;
        let SegmentLengths { t_v, t_f, n_overlap } = model.lengths;
        if procs.radar_vectors.is_empty() {
            return Err(Error::invalid("no radar-vector procedures to generate from"));
        }
        if !(procs.radar_vectors.iter().map(|p| p.1).sum::<f64>() > 0.0) {
            return Err(Error::invalid("radar-vector procedure frequencies are all zero"));
        }
        if let Some((p, _)) = procs.radar_vectors.iter().find(|(p, _)| p.len() != t_v) {
            return Err(Error::Dimension {
                expected: t_v,
                got: p.len(),
            });
        }
        if procs.iap.len() != t_f {
            return Err(Error::Dimension {
                expected: t_f,
                got: procs.iap.len(),
            });
        }
        // deviation coordinates of the first n_overlap final-approach points
        let observed: Vec<usize> = (2..2 + 3 * n_overlap).collect();
        let conditioners = model
            .radar_vector
            .components
            .iter()
            .map(|c| Conditioner::with_observation_noise(&model.final_approach, &observed, c.noise_var))
            .collect::<Result<_>>()?;
        Ok(Generator {
            model,
            procs,
            conditioners,
            observed,
        })
    }

    pub fn generate(&self, rng: &mut Rng) -> Result<SyntheticTrajectory> {
        let weights: Vec<f64> = self.procs.radar_vectors.iter().map(|p| p.1).collect();
        let pick = categorical(&weights, rng);
        self.generate_on(pick, rng)
    }

    /// Generate on the radar-vector procedure at `index` of the test
    /// procedures instead of drawing one by frequency.
    pub fn generate_on(&self, index: usize, rng: &mut Rng) -> Result<SyntheticTrajectory> {
        let Some((rv_proc, _)) = self.procs.radar_vectors.get(index) else {
            return Err(Error::invalid(format!("no radar-vector procedure at index {index}")));
        };
        let mut last_err = None;
        for _ in 0..MAX_ATTEMPTS {
            match self.attempt(rv_proc, rng) {
                Ok((points, components, conditioning)) => {
                    return Ok(SyntheticTrajectory {
                        points,
                        procedure: rv_proc.procedure.clone(),
                        components,
                        conditioning,
                    })
                }
                Err(e) => last_err = Some(e),
            }
        }
        Err(Error::numerical(format!(
            "trajectory generation failed {MAX_ATTEMPTS} times: {}",
            last_err.expect("at least one attempt")
        )))
    }

    fn attempt(&self, rv_proc: &ProceduralTrajectory, rng: &mut Rng) -> Result<(Vec<EnuPoint>, (usize, usize), Vec<f64>)> {
        let n = self.model.lengths.n_overlap;
        let (tau_v, j_v) = self.model.radar_vector.sample(rng);
        let tau_v = DeviationVector::from_slice(tau_v.as_slice())?;
        check_timing(&tau_v)?;
        let rv = reconstruct_trajectory(&tau_v, rv_proc)?;

        let iap = &self.procs.iap.points;
        let tail = &rv[rv.len() - n..];
        let values: Vec<f64> = tail
            .iter()
            .zip(iap)
            .flat_map(|(p, q)| [p.x - q.x, p.y - q.y, p.z - q.z])
            .collect();
        let conditioner = &self.conditioners[j_v];
        let cond = conditioner.condition(&values)?;
        let (tau_b, j_f) = cond.sample(rng);
        let mut full = DVector::zeros(self.model.final_approach.dimension);
        for (&i, v) in self.observed.iter().zip(&values) {
            full[i] = *v;
        }
        for (&i, v) in conditioner.free().iter().zip(tau_b.iter()) {
            full[i] = *v;
        }
        let tau_f = DeviationVector::from_slice(full.as_slice())?;
        check_timing(&tau_f)?;
        let fa = reconstruct_trajectory(&tau_f, &self.procs.iap)?;

        // the approach head repeats the radar-vector tail; keep the approach
        // copy, placed on the radar-vector clock
        let join = rv.len() - n;
        let shift = rv[join].t - fa[0].t;
        let mut points = rv;
        points.truncate(join);
        points.extend(fa.iter().map(|p| EnuPoint { t: p.t + shift, ..*p }));
        Ok((points, (j_v, j_f), values))
    }
}

fn check_timing(tau: &DeviationVector) -> Result<()> {
    if tau.transit_time > 0.0 && tau.total_distance > 0.0 {
        Ok(())
    } else {
        Err(Error::numerical("sampled transit time or distance is not positive"))
    }
}

/// Generate one trajectory. Prefer [`Generator`] for many draws.
pub fn generate(model: &SingleTrajectoryModel, procs: &TestProcedures, rng: &mut Rng) -> Result<SyntheticTrajectory> {
    Generator::new(model, procs)?.generate(rng)
}

#[derive(Serialize)]
struct TrajectoryMeta<'a> {
    traj_id: usize,
    procedure: &'a str,
    radar_vector_component: usize,
    final_approach_component: usize,
}

#[derive(Serialize)]
struct TrajectoryFileMeta<'a> {
    seed: u64,
    count: usize,
    trajectories: Vec<TrajectoryMeta<'a>>,
}

/// Write `traj_id,t,x,y,z` rows and a `<path>.meta.json` sidecar.
pub fn write_trajectories(path: impl AsRef<Path>, trajs: &[SyntheticTrajectory], seed: u64) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("traj_id,t,x,y,z\n");
    for (id, tr) in trajs.iter().enumerate() {
        for p in &tr.points {
            out.push_str(&format!("{id},{},{},{},{}\n", p.t, p.x, p.y, p.z));
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))?;
    let meta = TrajectoryFileMeta {
        seed,
        count: trajs.len(),
        trajectories: trajs
            .iter()
            .enumerate()
            .map(|(traj_id, t)| TrajectoryMeta {
                traj_id,
                procedure: &t.procedure,
                radar_vector_component: t.components.0,
                final_approach_component: t.components.1,
            })
            .collect(),
    };
    let meta_path = crate::preprocess::sidecar_path(path);
    std::fs::write(&meta_path, serde_json::to_string_pretty(&meta).expect("meta serializes"))
        .map_err(|e| Error::io(&meta_path, e))
}

/// Read a `traj_id,t,x,y,z` file into per-trajectory point lists, in id
/// order.
pub fn read_trajectories(path: impl AsRef<Path>) -> Result<Vec<Vec<EnuPoint>>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let mut out: std::collections::BTreeMap<u64, Vec<EnuPoint>> = Default::default();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse(format!("{}: bad value on row {}", path.display(), line + 2)))
        };
        let id: u64 = rec
            .get(0)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse(format!("{}: bad id on row {}", path.display(), line + 2)))?;
        out.entry(id).or_default().push(EnuPoint::new(field(1)?, field(2)?, field(3)?, field(4)?));
    }
    Ok(out.into_values().collect())
}
