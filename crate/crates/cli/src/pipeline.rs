//! Steps shared by several commands: reading tracks, building procedural
//! trajectories and splitting arrivals into training segments.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use termtraj::ingest::{classify_flight, clip_to_airspace, flight_to_enu, parse_tracks};
use termtraj::multi_model::arrival_procedural;
use termtraj::preprocess::{overlapping_segments, segment_trajectory, OverlapSegments};
use termtraj::procedures::{build_procedural_trajectory, read_procedures, ProcedureOptions};
use termtraj::units::nm_to_m;
use termtraj::{EnuTrack, FlightClass, ProceduralTrajectory, Procedure, ProcedureKind};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Points in the approach polyline used for segmentation.
const DENSE_APPROACH_POINTS: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub flight_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrackSummary {
    pub flights: usize,
    pub rejected_records: usize,
    pub arrivals: usize,
    pub departures: usize,
    pub overflights: usize,
    pub unclassified: usize,
}

pub struct LoadedArrivals {
    /// Clipped to the airspace, in file order.
    pub tracks: Vec<EnuTrack>,
    pub exclusions: Vec<Exclusion>,
    pub summary: TrackSummary,
}

pub fn load_arrivals(cfg: &RunConfig, path: &Path) -> CliResult<LoadedArrivals> {
    let parsed = parse_tracks(path)?;
    for e in &parsed.errors {
        log::warn!("{}: line {}: {}", path.display(), e.line, e.message);
    }
    let mut summary = TrackSummary {
        flights: parsed.flights.len(),
        rejected_records: parsed.errors.len(),
        ..Default::default()
    };
    let frame = cfg.airspace.frame();
    let radius = cfg.airspace.radius_m();
    let mut tracks = Vec::new();
    let mut exclusions = Vec::new();
    for f in &parsed.flights {
        match classify_flight(f, &cfg.airspace) {
            Ok(FlightClass::Arrival) => summary.arrivals += 1,
            Ok(FlightClass::Departure) => {
                summary.departures += 1;
                continue;
            }
            Ok(FlightClass::Overflight) => {
                summary.overflights += 1;
                continue;
            }
            Err(e) => {
                summary.unclassified += 1;
                exclusions.push(Exclusion {
                    flight_id: f.id.clone(),
                    reason: e.to_string(),
                });
                continue;
            }
        }
        match clip_to_airspace(&flight_to_enu(f, &frame), radius) {
            Some(t) => tracks.push(t),
            None => exclusions.push(Exclusion {
                flight_id: f.id.clone(),
                reason: "fewer than two points inside the airspace".into(),
            }),
        }
    }
    Ok(LoadedArrivals {
        tracks,
        exclusions,
        summary,
    })
}

pub fn procedure_options(cfg: &RunConfig) -> ProcedureOptions {
    ProcedureOptions {
        proximity_nm: cfg.settings.proximity_nm,
        default_speed_kts: cfg.settings.default_speed_kts,
    }
}

/// The first approach procedure in the configured `iap` file.
pub fn read_iap(cfg: &RunConfig) -> CliResult<Procedure> {
    let path = cfg.iap()?;
    read_procedures(path)?
        .into_iter()
        .find(|p| p.kind == ProcedureKind::Iap)
        .ok_or_else(|| CliError::data(format!("{}: no approach procedure (kind = \"iap\")", path.display())))
}

pub fn read_radar_vectors(cfg: &RunConfig) -> CliResult<Vec<Procedure>> {
    let path = cfg.procedures();
    let procs: Vec<Procedure> = read_procedures(&path)?
        .into_iter()
        .filter(|p| p.kind == ProcedureKind::RadarVector)
        .collect();
    if procs.is_empty() {
        return Err(CliError::data(format!("{}: no radar-vector procedures", path.display())));
    }
    Ok(procs)
}

/// Approach procedural trajectories: `t_f` points for the deviation
/// vectors and a dense one for segmentation. Timing comes from the
/// arrivals that fly the approach.
pub struct Approach {
    pub procedural: ProceduralTrajectory,
    pub dense: ProceduralTrajectory,
}

pub fn build_approach(cfg: &RunConfig, iap: &Procedure, exemplars: &[EnuTrack]) -> CliResult<Approach> {
    let opts = procedure_options(cfg);
    let ex = (!exemplars.is_empty()).then_some(exemplars);
    Ok(Approach {
        procedural: build_procedural_trajectory(iap, cfg.settings.t_f, ex, &cfg.airspace, &opts)?,
        dense: build_procedural_trajectory(iap, DENSE_APPROACH_POINTS, ex, &cfg.airspace, &opts)?,
    })
}

pub fn build_radar_vectors(cfg: &RunConfig, procs: &[Procedure]) -> CliResult<Vec<ProceduralTrajectory>> {
    let opts = procedure_options(cfg);
    Ok(procs
        .iter()
        .map(|p| build_procedural_trajectory(p, cfg.settings.t_v, None, &cfg.airspace, &opts))
        .collect::<termtraj::Result<_>>()?)
}

/// Whole-arrival procedural trajectories keyed by radar-vector name.
pub fn build_arrival_procedurals(
    cfg: &RunConfig,
    radar_vectors: &[ProceduralTrajectory],
    approach: &ProceduralTrajectory,
) -> CliResult<BTreeMap<String, ProceduralTrajectory>> {
    radar_vectors
        .iter()
        .map(|rv| Ok((rv.procedure.clone(), arrival_procedural(rv, approach, cfg.settings.t_pair)?)))
        .collect()
}

/// Training segments of one arrival.
pub struct Segments {
    pub boundary: usize,
    pub parts: OverlapSegments,
}

pub fn split_arrival(cfg: &RunConfig, track: &EnuTrack, approach: &Approach) -> termtraj::Result<Segments> {
    let s = &cfg.settings;
    let boundary = segment_trajectory(&track.points, &approach.dense, nm_to_m(s.segment_threshold_nm))?;
    let parts = overlapping_segments(&track.points, boundary, s.t_v, s.t_f, s.n_overlap)?;
    Ok(Segments { boundary, parts })
}

/// Split every arrival in parallel, keeping input order.
pub fn split_all(cfg: &RunConfig, tracks: &[EnuTrack], approach: &Approach) -> Vec<termtraj::Result<Segments>> {
    tracks.par_iter().map(|t| split_arrival(cfg, t, approach)).collect()
}

pub fn ensure_out_dir(cfg: &RunConfig) -> CliResult<()> {
    let dir = &cfg.settings.out_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::data(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

/// CSV field quoting for free-text values.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
