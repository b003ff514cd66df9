use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use termtraj::metrics::{
    extract_variables, js_divergence, loss_of_separation, shared_histograms, silhouette_sweep, Histogram,
    SeparationConfig, SeparationReport, VARIABLE_NAMES,
};
use termtraj::mixture::{select_rank, EmOptions};
use termtraj::multi_model::{
    assemble_scene_params, extract_pairs, generate_independent_scene, generate_scene, train_pairwise,
    write_scenes, ArrivalRecord, PairwiseModels, TrafficScene,
};
use termtraj::preprocess::{
    assign_procedure, build_deviation_vector, pchip_resample, DeviationDataset, RowMeta,
};
use termtraj::procedures::{nominal_paths_from_samples, write_procedures};
use termtraj::rng::{substream, Rng};
use termtraj::single_model::{
    self, write_trajectories, Generator, SegmentLengths, SegmentReport, SegmentSettings, SingleTrajectoryModel,
    TestProcedures,
};
use termtraj::trajectory::position_at;
use termtraj::{DeviationVector, EnuPoint, EnuTrack, ProceduralTrajectory, SegmentKind};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::files;
use crate::pipeline::{self, csv_field, read_json, write_json, write_text, Exclusion};

fn em_options(cfg: &RunConfig) -> EmOptions {
    EmOptions {
        max_iter: cfg.settings.em_max_iter,
        tol: cfg.settings.em_tol,
        reg: None,
    }
}

fn rng(cfg: &RunConfig, stage: &str) -> Rng {
    substream(cfg.settings.seed, stage)
}

fn lengths(cfg: &RunConfig) -> SegmentLengths {
    SegmentLengths {
        t_v: cfg.settings.t_v,
        t_f: cfg.settings.t_f,
        n_overlap: cfg.settings.n_overlap,
    }
}

// ---------------------------------------------------------------- review

#[derive(Serialize)]
struct Candidate {
    index: usize,
    name: String,
    frequency: f64,
    flights: usize,
    kept: bool,
}

#[derive(Serialize)]
struct ReviewReport {
    arrivals: usize,
    segmented: usize,
    candidates: Vec<Candidate>,
}

pub fn review_paths(cfg: &RunConfig, k: Option<usize>, keep: Option<&[usize]>) -> CliResult<()> {
    let k = k.unwrap_or(cfg.settings.review_k);
    if k == 0 {
        return Err(CliError::usage("--k must be positive"));
    }
    let loaded = pipeline::load_arrivals(cfg, cfg.tracks()?)?;
    let iap = pipeline::read_iap(cfg)?;
    let approach = pipeline::build_approach(cfg, &iap, &loaded.tracks)?;
    let mut rv_tracks = Vec::new();
    for (t, seg) in loaded.tracks.iter().zip(pipeline::split_all(cfg, &loaded.tracks, &approach)) {
        match seg {
            Ok(s) => rv_tracks.push(s.parts.radar_vector),
            Err(e) => log::info!("flight {} skipped: {e}", t.id),
        }
    }
    if rv_tracks.is_empty() {
        return Err(CliError::data("no arrival reaches the approach; nothing to review"));
    }
    let paths = nominal_paths_from_samples(&rv_tracks, k, "RV", &cfg.airspace, &mut rng(cfg, "review-paths"))?;
    let kept: Vec<usize> = match keep {
        Some(idx) => {
            if let Some(bad) = idx.iter().find(|&&i| i >= paths.len()) {
                return Err(CliError::usage(format!("--keep index {bad} out of range (0..{})", paths.len())));
            }
            let mut v = idx.to_vec();
            v.sort_unstable();
            v.dedup();
            v
        }
        None => (0..paths.len()).collect(),
    };
    pipeline::ensure_out_dir(cfg)?;
    write_procedures(cfg.out(files::NOMINAL_CANDIDATES), &paths)?;
    let kept_paths: Vec<_> = kept.iter().map(|&i| paths[i].clone()).collect();
    write_procedures(cfg.out(files::NOMINAL_PATHS), &kept_paths)?;
    let n = rv_tracks.len();
    let report = ReviewReport {
        arrivals: loaded.tracks.len(),
        segmented: n,
        candidates: paths
            .iter()
            .enumerate()
            .map(|(index, p)| Candidate {
                index,
                name: p.name.clone(),
                frequency: p.frequency,
                flights: (p.frequency * n as f64).round() as usize,
                kept: kept.contains(&index),
            })
            .collect(),
    };
    write_json(&cfg.out(files::REVIEW_REPORT), &report)
}

// ---------------------------------------------------------------- ingest

struct IngestRow {
    meta: RowMeta,
    boundary: usize,
    radar_vector: DeviationVector,
    final_approach: DeviationVector,
    arrival: DeviationVector,
}

#[derive(Serialize)]
struct IngestReport {
    tracks: pipeline::TrackSummary,
    retained: usize,
    excluded: usize,
    per_procedure: BTreeMap<String, usize>,
    t_v: usize,
    t_f: usize,
    t_pair: usize,
    n_overlap: usize,
}

fn ingest_one(
    cfg: &RunConfig,
    track: &EnuTrack,
    approach: &pipeline::Approach,
    radar_vectors: &[ProceduralTrajectory],
    arrivals: &BTreeMap<String, ProceduralTrajectory>,
) -> termtraj::Result<IngestRow> {
    let seg = pipeline::split_arrival(cfg, track, approach)?;
    let (rv, fa) = (&seg.parts.radar_vector, &seg.parts.final_approach);
    let pick = assign_procedure(rv, radar_vectors)?;
    let proc = &radar_vectors[pick];
    let whole = pchip_resample(&track.points, cfg.settings.t_pair)?;
    Ok(IngestRow {
        meta: RowMeta {
            flight_id: track.id.clone(),
            procedure: proc.procedure.clone(),
            arrival_time: track.end_time(),
        },
        boundary: seg.boundary,
        radar_vector: build_deviation_vector(rv, proc)?,
        final_approach: build_deviation_vector(fa, &approach.procedural)?,
        arrival: build_deviation_vector(&whole, &arrivals[&proc.procedure])?,
    })
}

pub fn ingest(cfg: &RunConfig) -> CliResult<()> {
    let loaded = pipeline::load_arrivals(cfg, cfg.tracks()?)?;
    let iap = pipeline::read_iap(cfg)?;
    let approach = pipeline::build_approach(cfg, &iap, &loaded.tracks)?;
    let rv_procs = pipeline::read_radar_vectors(cfg)?;
    let radar_vectors = pipeline::build_radar_vectors(cfg, &rv_procs)?;
    let arrival_procs = pipeline::build_arrival_procedurals(cfg, &radar_vectors, &approach.procedural)?;

    let results: Vec<termtraj::Result<IngestRow>> = loaded
        .tracks
        .par_iter()
        .map(|t| ingest_one(cfg, t, &approach, &radar_vectors, &arrival_procs))
        .collect();
    let mut exclusions = loaded.exclusions;
    let mut rows = Vec::new();
    for (t, r) in loaded.tracks.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => exclusions.push(Exclusion {
                flight_id: t.id.clone(),
                reason: e.to_string(),
            }),
        }
    }
    if rows.is_empty() {
        return Err(CliError::data(format!(
            "no arrival in {} could be segmented against the approach; datasets would be empty",
            cfg.tracks()?.display()
        )));
    }
    let s = &cfg.settings;
    let dataset = |kind, len, f: &dyn Fn(&IngestRow) -> &DeviationVector| {
        DeviationDataset::new(kind, len, rows.iter().map(|r| (r.meta.clone(), f(r).to_vec())).collect())
    };
    let rv = dataset(SegmentKind::RadarVector, s.t_v, &|r| &r.radar_vector)?;
    let fa = dataset(SegmentKind::FinalApproach, s.t_f, &|r| &r.final_approach)?;
    let arr = dataset(SegmentKind::Arrival, s.t_pair, &|r| &r.arrival)?;

    pipeline::ensure_out_dir(cfg)?;
    rv.write(cfg.out(files::RADAR_VECTOR_DATA))?;
    fa.write(cfg.out(files::FINAL_APPROACH_DATA))?;
    arr.write(cfg.out(files::ARRIVAL_DATA))?;

    let mut assignments = String::from("flight_id,procedure,boundary_index,arrival_time\n");
    let mut per_procedure = BTreeMap::new();
    for r in &rows {
        assignments.push_str(&format!(
            "{},{},{},{}\n",
            csv_field(&r.meta.flight_id),
            csv_field(&r.meta.procedure),
            r.boundary,
            r.meta.arrival_time
        ));
        *per_procedure.entry(r.meta.procedure.clone()).or_insert(0) += 1;
    }
    write_text(&cfg.out(files::ASSIGNMENTS), &assignments)?;
    let mut excl = String::from("flight_id,reason\n");
    for e in &exclusions {
        excl.push_str(&format!("{},{}\n", csv_field(&e.flight_id), csv_field(&e.reason)));
    }
    write_text(&cfg.out(files::EXCLUSIONS), &excl)?;
    let report = IngestReport {
        tracks: loaded.summary,
        retained: rows.len(),
        excluded: exclusions.len(),
        per_procedure,
        t_v: s.t_v,
        t_f: s.t_f,
        t_pair: s.t_pair,
        n_overlap: s.n_overlap,
    };
    write_json(&cfg.out(files::INGEST_REPORT), &report)?;
    log::info!("ingested {} arrivals, excluded {}", report.retained, report.excluded);
    Ok(())
}

fn read_dataset(path: &Path) -> CliResult<DeviationDataset> {
    if !path.exists() {
        return Err(CliError::data(format!("dataset {} not found; run `ingest` first", path.display())));
    }
    let ds = DeviationDataset::read(path)?;
    if ds.is_empty() {
        return Err(CliError::data(format!("dataset {} is empty", path.display())));
    }
    Ok(ds)
}

// ---------------------------------------------------------------- select

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoredValue {
    pub value: usize,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentSelection {
    pub segment: SegmentKind,
    pub rows: usize,
    /// Silhouette per number of components.
    pub silhouette: Vec<ScoredValue>,
    pub k: usize,
    /// Held-out log-likelihood per rank.
    pub rank_curve: Vec<ScoredValue>,
    pub rank: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionReport {
    pub segments: Vec<SegmentSelection>,
}

impl SelectionReport {
    fn get(&self, kind: SegmentKind) -> Option<&SegmentSelection> {
        self.segments.iter().find(|s| s.segment == kind)
    }
}

fn select_segment(cfg: &RunConfig, ds: &DeviationDataset, rng: &mut Rng) -> CliResult<SegmentSelection> {
    let data = &ds.data;
    let sweep = silhouette_sweep(data, &cfg.settings.k_grid, &em_options(cfg), rng)?;
    let limit = data.ncols().min(data.nrows() * 4 / 5);
    let ranks: Vec<usize> = cfg.settings.rank_grid.iter().copied().filter(|&r| r < limit).collect();
    if ranks.len() < cfg.settings.rank_grid.len() {
        log::warn!("{} segment: ranks at or above {limit} dropped from the grid", ds.meta.segment.as_str());
    }
    if ranks.is_empty() {
        return Err(CliError::usage(format!(
            "rank_grid has no value below {limit} for the {} segment",
            ds.meta.segment.as_str()
        )));
    }
    let ranked = select_rank(data, &ranks, rng)?;
    let scored = |curve: Vec<(usize, f64)>| curve.into_iter().map(|(value, score)| ScoredValue { value, score }).collect();
    Ok(SegmentSelection {
        segment: ds.meta.segment,
        rows: data.nrows(),
        silhouette: scored(sweep.curve),
        k: sweep.best,
        rank_curve: scored(ranked.curve),
        rank: ranked.best,
    })
}

pub fn select(cfg: &RunConfig) -> CliResult<()> {
    let rv = read_dataset(&cfg.out(files::RADAR_VECTOR_DATA))?;
    let fa = read_dataset(&cfg.out(files::FINAL_APPROACH_DATA))?;
    let mut r = rng(cfg, "select");
    let report = SelectionReport {
        segments: vec![select_segment(cfg, &rv, &mut r)?, select_segment(cfg, &fa, &mut r)?],
    };
    for s in &report.segments {
        log::info!("{}: K = {}, rank = {}", s.segment.as_str(), s.k, s.rank);
    }
    write_json(&cfg.out(files::SELECTION), &report)
}

// ---------------------------------------------------------------- train

fn settings_for(
    cfg: &RunConfig,
    kind: SegmentKind,
    k: Option<usize>,
    rank: Option<usize>,
    selection: &Option<SelectionReport>,
) -> CliResult<SegmentSettings> {
    let chosen = selection.as_ref().and_then(|s| s.get(kind));
    let missing = || {
        CliError::data(format!(
            "no {} settings: set them in the config or run `select` to write {}",
            kind.as_str(),
            cfg.out(files::SELECTION).display()
        ))
    };
    Ok(SegmentSettings {
        k: k.or(chosen.map(|c| c.k)).ok_or_else(missing)?,
        rank: rank.or(chosen.map(|c| c.rank)).ok_or_else(missing)?,
    })
}

pub fn train(cfg: &RunConfig) -> CliResult<()> {
    let rv = read_dataset(&cfg.out(files::RADAR_VECTOR_DATA))?;
    let fa = read_dataset(&cfg.out(files::FINAL_APPROACH_DATA))?;
    let sel_path = cfg.out(files::SELECTION);
    let selection: Option<SelectionReport> = if sel_path.exists() { Some(read_json(&sel_path)?) } else { None };
    let s = &cfg.settings;
    let rv_set = settings_for(cfg, SegmentKind::RadarVector, s.k_rv, s.rank_rv, &selection)?;
    let fa_set = settings_for(cfg, SegmentKind::FinalApproach, s.k_fa, s.rank_fa, &selection)?;
    let (model, reports) = single_model::train(
        &rv.data,
        &fa.data,
        rv_set,
        fa_set,
        lengths(cfg),
        &em_options(cfg),
        &mut rng(cfg, "train"),
    )?;
    model.write(cfg.out(files::SINGLE_MODEL))?;
    write_json(&cfg.out(files::TRAIN_LOG), &reports)
}

#[derive(Serialize)]
struct PairLog {
    first: String,
    second: String,
    report: SegmentReport,
}

#[derive(Serialize)]
struct PairwiseLog {
    pairs: usize,
    window_s: f64,
    trained: Vec<PairLog>,
    skipped: Vec<(String, String, usize)>,
}

pub fn train_pairwise_cmd(cfg: &RunConfig) -> CliResult<()> {
    let ds = read_dataset(&cfg.out(files::ARRIVAL_DATA))?;
    let records = ds
        .meta
        .rows
        .iter()
        .enumerate()
        .map(|(i, m)| {
            Ok(ArrivalRecord {
                flight_id: m.flight_id.clone(),
                procedure: m.procedure.clone(),
                arrival_time: m.arrival_time,
                tau: DeviationVector::from_slice(ds.data.row(i).transpose().as_slice())?,
            })
        })
        .collect::<termtraj::Result<Vec<_>>>()?;
    let s = &cfg.settings;
    let (samples, groups) = extract_pairs(&records, s.pair_window_s)?;
    if samples.is_empty() {
        return Err(CliError::data(format!("no successive arrivals within {} s", s.pair_window_s)));
    }
    let dim = 2 * (3 * s.t_pair + 2) + 1;
    let rank = s.pair_rank.unwrap_or(dim);
    let (models, report) = train_pairwise(
        &groups,
        ds.meta.length,
        s.pair_k,
        rank,
        s.pair_min_samples,
        &em_options(cfg),
        &mut rng(cfg, "train-pairwise"),
    )?;
    if models.models.is_empty() {
        return Err(CliError::data("every procedure pair has too few samples to train"));
    }
    models.write(cfg.out(files::PAIRWISE_MODEL))?;
    let log = PairwiseLog {
        pairs: samples.len(),
        window_s: s.pair_window_s,
        trained: report
            .trained
            .into_iter()
            .map(|((first, second), report)| PairLog { first, second, report })
            .collect(),
        skipped: report.skipped.into_iter().map(|((a, b), n)| (a, b, n)).collect(),
    };
    write_json(&cfg.out(files::TRAIN_PAIRWISE_LOG), &log)
}

// ---------------------------------------------------------------- generate

/// Radar-vector and approach procedural trajectories for generation. The
/// approach is timed by the recorded arrivals when a track file is
/// configured, exactly as in `ingest`.
fn test_procedures(cfg: &RunConfig) -> CliResult<TestProcedures> {
    let iap = pipeline::read_iap(cfg)?;
    let exemplars = match &cfg.settings.tracks {
        Some(path) => pipeline::load_arrivals(cfg, path)?.tracks,
        None => Vec::new(),
    };
    let approach = pipeline::build_approach(cfg, &iap, &exemplars)?;
    let procs = pipeline::read_radar_vectors(cfg)?;
    let rvs = pipeline::build_radar_vectors(cfg, &procs)?;
    Ok(TestProcedures {
        radar_vectors: rvs.into_iter().zip(procs.iter().map(|p| p.frequency)).collect(),
        iap: approach.procedural,
    })
}

fn read_model(path: &Path) -> CliResult<SingleTrajectoryModel> {
    if !path.exists() {
        return Err(CliError::data(format!("model {} not found; run `train` first", path.display())));
    }
    Ok(SingleTrajectoryModel::read(path)?)
}

fn read_pairwise(path: &Path) -> CliResult<PairwiseModels> {
    if !path.exists() {
        return Err(CliError::data(format!("model {} not found; run `train-pairwise` first", path.display())));
    }
    Ok(PairwiseModels::read(path)?)
}

/// Write through `write`, removing the file and its sidecar on failure.
fn write_or_clean(path: &Path, write: impl FnOnce(&Path) -> termtraj::Result<()>) -> CliResult<()> {
    write(path).map_err(|e| {
        let _ = fs::remove_file(path);
        let _ = fs::remove_file(termtraj::preprocess::sidecar_path(path));
        CliError::from(e)
    })
}

pub fn generate(cfg: &RunConfig, count: Option<usize>) -> CliResult<()> {
    let model = read_model(&cfg.out(files::SINGLE_MODEL))?;
    let procs = test_procedures(cfg)?;
    let generator = Generator::new(&model, &procs)?;
    let n = count.unwrap_or(cfg.settings.n_trajectories);
    let mut r = rng(cfg, "generate");
    let trajs = (0..n).map(|_| generator.generate(&mut r)).collect::<termtraj::Result<Vec<_>>>()?;
    pipeline::ensure_out_dir(cfg)?;
    write_or_clean(&cfg.out(files::TRAJECTORIES), |p| write_trajectories(p, &trajs, cfg.settings.seed))
}

fn draw_sequence(
    models: &PairwiseModels,
    names: &[String],
    weights: &[f64],
    n: usize,
    rng: &mut Rng,
) -> CliResult<Vec<String>> {
    use rand::Rng as _;
    let total: f64 = weights.iter().sum();
    let draw = |rng: &mut Rng| {
        let mut u = rng.random::<f64>() * total;
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                return i;
            }
            u -= w;
        }
        weights.len() - 1
    };
    for _ in 0..1000 {
        let seq: Vec<String> = (0..n).map(|_| names[draw(rng)].clone()).collect();
        let complete = (0..n).all(|j| (j + 1..n).all(|k| models.models.contains_key(&(seq[j].clone(), seq[k].clone()))));
        if complete {
            return Ok(seq);
        }
    }
    Err(CliError::data("could not draw a procedure sequence covered by the trained pairwise models"))
}

pub fn generate_scenes(cfg: &RunConfig, independent: bool, count: Option<usize>, aircraft: Option<usize>) -> CliResult<()> {
    let n_scenes = count.unwrap_or(cfg.settings.n_scenes);
    let n_ac = aircraft.unwrap_or(cfg.settings.scene_aircraft);
    if n_ac == 0 {
        return Err(CliError::usage("a scene needs at least one aircraft"));
    }
    let pairwise = read_pairwise(&cfg.out(files::PAIRWISE_MODEL))?;
    if pairwise.length != cfg.settings.t_pair {
        return Err(CliError::data(format!(
            "pairwise model length {} differs from t_pair = {}",
            pairwise.length, cfg.settings.t_pair
        )));
    }
    let procs = test_procedures(cfg)?;
    let names: Vec<String> = procs.radar_vectors.iter().map(|p| p.0.procedure.clone()).collect();
    let weights: Vec<f64> = procs.radar_vectors.iter().map(|p| p.1).collect();
    let sequence = |r: &mut Rng| -> CliResult<Vec<String>> {
        match &cfg.settings.scene_procedures {
            Some(fixed) if fixed.len() != n_ac => Err(CliError::usage(format!(
                "scene_procedures lists {} procedures for {n_ac} aircraft",
                fixed.len()
            ))),
            Some(fixed) => Ok(fixed.clone()),
            None => draw_sequence(&pairwise, &names, &weights, n_ac, r),
        }
    };
    let scenes: Vec<TrafficScene> = if independent {
        let model = read_model(&cfg.out(files::SINGLE_MODEL))?;
        let generator = Generator::new(&model, &procs)?;
        let mut r = rng(cfg, "generate-scenes-independent");
        let mut out = Vec::with_capacity(n_scenes);
        for _ in 0..n_scenes {
            let seq = sequence(&mut r)?
                .into_iter()
                .map(|name| match names.iter().position(|n| *n == name) {
                    Some(i) => Ok((i, name)),
                    None => Err(CliError::data(format!("unknown procedure `{name}` in scene sequence"))),
                })
                .collect::<CliResult<Vec<_>>>()?;
            out.push(generate_independent_scene(&generator, &pairwise, &seq, &mut r)?);
        }
        out
    } else {
        let rvs: Vec<ProceduralTrajectory> = procs.radar_vectors.iter().map(|p| p.0.clone()).collect();
        let arrivals = pipeline::build_arrival_procedurals(cfg, &rvs, &procs.iap)?;
        let mut r = rng(cfg, "generate-scenes");
        let mut out = Vec::with_capacity(n_scenes);
        for _ in 0..n_scenes {
            let seq = sequence(&mut r)?;
            let procedurals = seq
                .iter()
                .map(|name| {
                    arrivals
                        .get(name)
                        .ok_or_else(|| CliError::data(format!("unknown procedure `{name}` in scene sequence")))
                })
                .collect::<CliResult<Vec<_>>>()?;
            let params = assemble_scene_params(&pairwise, &seq, &mut r)?;
            out.push(generate_scene(&params, &procedurals, &mut r)?);
        }
        out
    };
    pipeline::ensure_out_dir(cfg)?;
    let name = if independent { files::INDEPENDENT_SCENES } else { files::SCENES };
    write_or_clean(&cfg.out(name), |p| write_scenes(p, &scenes, cfg.settings.seed))
}

// ---------------------------------------------------------------- evaluate

/// Scenes of ENU trajectories on a common clock per scene.
fn read_set(cfg: &RunConfig, path: &Path) -> CliResult<Vec<Vec<Vec<EnuPoint>>>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let header = text.lines().next().unwrap_or("").to_ascii_lowercase();
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let scenes = if cols.first() == Some(&"scene_id") {
        termtraj::multi_model::read_scenes(path)?
    } else if cols.first() == Some(&"traj_id") {
        single_model::read_trajectories(path)?.into_iter().map(|t| vec![t]).collect()
    } else if cols.contains(&"lat") && cols.contains(&"lon") {
        // recorded tracks: every arrival on the file's clock, one scene
        let loaded = pipeline::load_arrivals(cfg, path)?;
        vec![loaded
            .tracks
            .iter()
            .map(|t| t.points.iter().map(|p| EnuPoint { t: p.t + t.start_time, ..*p }).collect())
            .collect()]
    } else {
        return Err(CliError::data(format!("{}: unrecognized header `{header}`", path.display())));
    };
    if scenes.iter().all(|s| s.iter().all(|t| t.is_empty())) {
        return Err(CliError::data(format!("{}: no trajectories", path.display())));
    }
    Ok(scenes)
}

/// Linear resampling on the grid of multiples of `step` inside each
/// trajectory's span, so aircraft of a scene share sample instants.
fn resample_set(scenes: Vec<Vec<Vec<EnuPoint>>>, step: f64) -> Vec<Vec<Vec<EnuPoint>>> {
    if step == 0.0 {
        return scenes;
    }
    scenes
        .into_iter()
        .map(|scene| {
            scene
                .into_iter()
                .map(|traj| {
                    let (Some(a), Some(b)) = (traj.first(), traj.last()) else {
                        return traj;
                    };
                    let (k0, k1) = ((a.t / step).ceil() as i64, (b.t / step).floor() as i64);
                    (k0..=k1)
                        .filter_map(|k| {
                            let t = k as f64 * step;
                            position_at(&traj, t).map(|q| EnuPoint::new(t, q[0], q[1], q[2]))
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

#[derive(Serialize)]
struct SetSummary {
    path: PathBuf,
    scenes: usize,
    trajectories: usize,
    points: usize,
}

#[derive(Serialize)]
struct VariableComparison {
    name: &'static str,
    js_divergence: Option<f64>,
    actual: Option<Histogram>,
    synthetic: Option<Histogram>,
}

#[derive(Serialize)]
struct SeparationComparison {
    config: SeparationConfig,
    actual: SeparationReport,
    synthetic: SeparationReport,
}

#[derive(Serialize)]
struct EvaluationReport {
    eval_step_s: f64,
    actual: SetSummary,
    synthetic: SetSummary,
    variables: Vec<VariableComparison>,
    loss_of_separation: SeparationComparison,
}

fn summary(path: &Path, set: &[Vec<Vec<EnuPoint>>]) -> SetSummary {
    SetSummary {
        path: path.to_path_buf(),
        scenes: set.len(),
        trajectories: set.iter().map(Vec::len).sum(),
        points: set.iter().flatten().map(Vec::len).sum(),
    }
}

pub fn evaluate(cfg: &RunConfig, actual: Option<PathBuf>, synthetic: Option<PathBuf>) -> CliResult<()> {
    let actual_path = actual
        .or_else(|| cfg.settings.actual.clone())
        .ok_or_else(|| CliError::usage("no actual set: pass --actual or set `actual` in the config"))?;
    let synthetic_path = synthetic
        .or_else(|| cfg.settings.synthetic.clone())
        .unwrap_or_else(|| cfg.out(files::TRAJECTORIES));
    let step = cfg.settings.eval_step_s;
    let a = resample_set(read_set(cfg, &actual_path)?, step);
    let s = resample_set(read_set(cfg, &synthetic_path)?, step);
    let (va, vs) = (extract_variables(&a), extract_variables(&s));
    let mut variables = Vec::new();
    for name in VARIABLE_NAMES {
        let (p, q) = (va.get(name).expect("known variable"), vs.get(name).expect("known variable"));
        if p.is_empty() || q.is_empty() {
            variables.push(VariableComparison {
                name,
                js_divergence: None,
                actual: None,
                synthetic: None,
            });
            continue;
        }
        let (hp, hq) = shared_histograms(p, q)?;
        variables.push(VariableComparison {
            name,
            js_divergence: Some(js_divergence(&hp, &hq)?),
            actual: Some(hp),
            synthetic: Some(hq),
        });
    }
    let sep = SeparationConfig {
        horizontal_min_nm: cfg.settings.horizontal_min_nm,
        vertical_min_ft: cfg.settings.vertical_min_ft,
        unit: cfg.settings.los_unit,
    };
    let report = EvaluationReport {
        eval_step_s: step,
        actual: summary(&actual_path, &a),
        synthetic: summary(&synthetic_path, &s),
        variables,
        loss_of_separation: SeparationComparison {
            config: sep,
            actual: loss_of_separation(&a, &sep)?,
            synthetic: loss_of_separation(&s, &sep)?,
        },
    };
    pipeline::ensure_out_dir(cfg)?;
    write_json(&cfg.out(files::EVALUATION), &report)
}

