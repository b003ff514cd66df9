//! Flight procedures (published approaches and radar-vector nominal paths)
//! and their fixed-length, time-parameterized resampling.

mod builder;
mod nominal;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use builder::{build_procedural_trajectory, ProceduralPath, ProcedureOptions};
pub use nominal::{extract_nominal_paths, nominal_paths_from_samples};

use crate::error::{Error, Result};
use crate::ingest::EnuPoint;
use crate::trajectory::path_length;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcedureKind {
    Iap,
    RadarVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub lat: f64,
    pub lon: f64,
    /// Feet; absent when the procedure leaves it unconstrained.
    pub alt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Procedure {
    pub name: String,
    pub kind: ProcedureKind,
    pub waypoints: Vec<Waypoint>,
    /// Relative frequency weight.
    pub frequency: f64,
    /// Seconds from the first waypoint, one per waypoint. Present for
    /// nominal paths extracted from recorded flights.
    pub times: Option<Vec<f64>>,
    pub runway: Option<String>,
}

impl Procedure {
    pub fn validate(&self) -> Result<()> {
        if self.waypoints.len() < 2 {
            return Err(Error::invalid(format!(
                "procedure `{}` needs at least two waypoints",
                self.name
            )));
        }
        if !(self.frequency >= 0.0) {
            return Err(Error::invalid(format!(
                "procedure `{}` has negative frequency",
                self.name
            )));
        }
        if let Some(times) = &self.times {
            if times.len() != self.waypoints.len() {
                return Err(Error::invalid(format!(
                    "procedure `{}`: {} times for {} waypoints",
                    self.name,
                    times.len(),
                    self.waypoints.len()
                )));
            }
        }
        for w in &self.waypoints {
            if !(-90.0..=90.0).contains(&w.lat) || !(-180.0..=180.0).contains(&w.lon) {
                return Err(Error::invalid(format!(
                    "procedure `{}` has an out-of-range waypoint",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// A procedure resampled to a fixed number of timed ENU points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProceduralTrajectory {
    pub procedure: String,
    pub points: Vec<EnuPoint>,
    /// Sum of consecutive 3-D segment lengths, meters.
    pub total_distance: f64,
}

impl ProceduralTrajectory {
    pub fn from_points(name: impl Into<String>, points: Vec<EnuPoint>) -> Self {
        let total_distance = path_length(&points);
        ProceduralTrajectory {
            procedure: name.into(),
            points,
            total_distance,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn duration(&self) -> f64 {
        crate::trajectory::duration(&self.points)
    }
}

// On-disk layout: a list of `[[procedure]]` tables, waypoints as
// `[lat, lon]` or `[lat, lon, alt_ft]` arrays.
#[derive(Serialize, Deserialize)]
struct ProcedureDoc {
    name: String,
    kind: ProcedureKind,
    #[serde(default = "one")]
    frequency: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    runway: Option<String>,
    waypoints: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    times: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

#[derive(Serialize, Deserialize)]
struct ProcedureFile {
    #[serde(default)]
    procedure: Vec<ProcedureDoc>,
}

pub fn parse_procedures(text: &str) -> Result<Vec<Procedure>> {
    let file: ProcedureFile =
        toml::from_str(text).map_err(|e| Error::Parse(format!("procedure file: {e}")))?;
    file.procedure
        .into_iter()
        .map(|doc| {
            let waypoints = doc
                .waypoints
                .iter()
                .map(|w| match w.as_slice() {
                    [lat, lon] => Ok(Waypoint { lat: *lat, lon: *lon, alt: None }),
                    [lat, lon, alt] => Ok(Waypoint { lat: *lat, lon: *lon, alt: Some(*alt) }),
                    _ => Err(Error::Parse(format!(
                        "procedure `{}`: waypoint must be [lat, lon] or [lat, lon, alt]",
                        doc.name
                    ))),
                })
                .collect::<Result<Vec<_>>>()?;
            let p = Procedure {
                name: doc.name,
                kind: doc.kind,
                waypoints,
                frequency: doc.frequency,
                times: doc.times,
                runway: doc.runway,
            };
            p.validate()?;
            Ok(p)
        })
        .collect()
}

pub fn read_procedures(path: impl AsRef<Path>) -> Result<Vec<Procedure>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_procedures(&text)
}

pub fn procedures_to_string(procs: &[Procedure]) -> String {
    let file = ProcedureFile {
        procedure: procs
            .iter()
            .map(|p| ProcedureDoc {
                name: p.name.clone(),
                kind: p.kind,
                frequency: p.frequency,
                runway: p.runway.clone(),
                waypoints: p
                    .waypoints
                    .iter()
                    .map(|w| match w.alt {
                        Some(a) => vec![w.lat, w.lon, a],
                        None => vec![w.lat, w.lon],
                    })
                    .collect(),
                times: p.times.clone(),
            })
            .collect(),
    };
    toml::to_string(&file).expect("procedures serialize")
}

pub fn write_procedures(path: impl AsRef<Path>, procs: &[Procedure]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, procedures_to_string(procs)).map_err(|e| Error::io(path, e))
}
