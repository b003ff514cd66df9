//! Track ingestion: parsing, geodetic to ENU conversion, airspace
//! clipping, and arrival/departure/overflight classification.

mod classify;
mod geodesy;
mod tracks;

use serde::{Deserialize, Serialize};

pub use classify::{assign_runway, classify_flight, RunwayHeading};
pub use geodesy::{ecef_to_geodetic, geodetic_to_ecef, EnuFrame};
pub use tracks::{parse_tracks, read_tracks_str, write_tracks, ParsedTracks, RecordError};

use crate::error::{Error, Result};
use crate::units::{ft_to_m, nm_to_m};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    /// Seconds, monotonic epoch.
    pub time: f64,
    pub lat: f64,
    pub lon: f64,
    /// Pressure altitude, feet.
    pub alt: f64,
    /// Knots.
    pub ground_speed: Option<f64>,
    /// Feet per minute.
    pub vertical_rate: Option<f64>,
}

impl TrackPoint {
    pub fn new(time: f64, lat: f64, lon: f64, alt: f64) -> Self {
        TrackPoint {
            time,
            lat,
            lon,
            alt,
            ground_speed: None,
            vertical_rate: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.lat) {
            return Err(Error::invalid(format!("latitude {} out of range", self.lat)));
        }
        if !(-180.0..=180.0).contains(&self.lon) {
            return Err(Error::invalid(format!("longitude {} out of range", self.lon)));
        }
        if !self.alt.is_finite() || !self.time.is_finite() {
            return Err(Error::invalid("non-finite altitude or time"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlightClass {
    Arrival,
    Departure,
    Overflight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flight {
    pub id: String,
    /// Strictly increasing in time, at least two points.
    pub points: Vec<TrackPoint>,
    pub class: Option<FlightClass>,
    pub runway: Option<String>,
}

impl Flight {
    /// Time-reversed copy: positions visited in the opposite order, times
    /// mirrored so they still increase.
    pub fn reversed(&self) -> Flight {
        let t_end = self.points.last().map_or(0.0, |p| p.time);
        let t_start = self.points.first().map_or(0.0, |p| p.time);
        let points = self
            .points
            .iter()
            .rev()
            .map(|p| TrackPoint {
                time: t_start + (t_end - p.time),
                ..*p
            })
            .collect();
        Flight {
            id: self.id.clone(),
            points,
            class: None,
            runway: self.runway.clone(),
        }
    }
}

/// A position in the local east-north-up frame, meters; `t` is seconds
/// since the start of the trajectory it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnuPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl EnuPoint {
    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        EnuPoint { t, x, y, z }
    }

    pub fn pos(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn horizontal_dist(&self, other: &EnuPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist(&self, other: &EnuPoint) -> f64 {
        let dz = self.z - other.z;
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + dz * dz).sqrt()
    }

    pub fn range(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// A flight converted to ENU. Point times are relative to `start_time`,
/// which is on the track file's epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EnuTrack {
    pub id: String,
    pub start_time: f64,
    pub points: Vec<EnuPoint>,
    pub runway: Option<String>,
}

impl EnuTrack {
    /// Absolute time of the last point (landing time for an arrival).
    pub fn end_time(&self) -> f64 {
        self.start_time + self.points.last().map_or(0.0, |p| p.t)
    }
}

fn default_radius() -> f64 {
    25.0
}
fn default_ceiling() -> f64 {
    500.0
}
fn default_landing_radius() -> f64 {
    2.0
}
fn default_min_range_change() -> f64 {
    1.0
}

/// Airport reference point and airspace extent. Units as they appear in
/// the configuration file: degrees, feet, nautical miles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AirspaceConfig {
    pub origin_lat: f64,
    pub origin_lon: f64,
    #[serde(default)]
    pub origin_alt_ft: f64,
    #[serde(default = "default_radius")]
    pub radius_nm: f64,
    /// Height above the reference altitude below which a track end counts
    /// as a landing (or a track start as a takeoff).
    #[serde(default = "default_ceiling")]
    pub landing_ceiling_ft: f64,
    #[serde(default = "default_landing_radius")]
    pub landing_radius_nm: f64,
    /// Net change in range to the origin needed to call a track inbound or
    /// outbound.
    #[serde(default = "default_min_range_change")]
    pub min_range_change_nm: f64,
}

impl AirspaceConfig {
    pub fn new(origin_lat: f64, origin_lon: f64, origin_alt_ft: f64) -> Self {
        AirspaceConfig {
            origin_lat,
            origin_lon,
            origin_alt_ft,
            radius_nm: default_radius(),
            landing_ceiling_ft: default_ceiling(),
            landing_radius_nm: default_landing_radius(),
            min_range_change_nm: default_min_range_change(),
        }
    }

    /// Parse the `key = value` configuration text. Unrelated keys are
    /// ignored so the airspace can share a file with the run settings.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let cfg: AirspaceConfig =
            toml::from_str(text).map_err(|e| Error::Parse(format!("airspace config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius_nm > 0.0) {
            return Err(Error::invalid("airspace radius must be positive"));
        }
        if !(-90.0..=90.0).contains(&self.origin_lat) || !(-180.0..=180.0).contains(&self.origin_lon)
        {
            return Err(Error::invalid("airspace origin out of range"));
        }
        Ok(())
    }

    pub fn frame(&self) -> EnuFrame {
        EnuFrame::new(self.origin_lat, self.origin_lon, self.origin_alt_ft)
    }

    pub fn radius_m(&self) -> f64 {
        nm_to_m(self.radius_nm)
    }

    pub fn origin_alt_m(&self) -> f64 {
        ft_to_m(self.origin_alt_ft)
    }
}

/// Geodetic (degrees, feet) to ENU meters relative to the configured
/// airport reference point.
pub fn wgs84_to_enu(lat: f64, lon: f64, alt_ft: f64, config: &AirspaceConfig) -> [f64; 3] {
    config.frame().to_enu(lat, lon, alt_ft)
}

/// Inverse of [`wgs84_to_enu`]: returns (lat, lon, alt_ft).
pub fn enu_to_wgs84(enu: [f64; 3], config: &AirspaceConfig) -> (f64, f64, f64) {
    config.frame().to_geodetic(enu)
}

/// Convert a flight to ENU with times relative to its first point.
pub fn flight_to_enu(flight: &Flight, frame: &EnuFrame) -> EnuTrack {
    let start_time = flight.points.first().map_or(0.0, |p| p.time);
    let points = flight
        .points
        .iter()
        .map(|p| {
            let [x, y, z] = frame.to_enu(p.lat, p.lon, p.alt);
            EnuPoint::new(p.time - start_time, x, y, z)
        })
        .collect();
    EnuTrack {
        id: flight.id.clone(),
        start_time,
        points,
        runway: flight.runway.clone(),
    }
}

/// Restrict a track to the span between its first and last points inside
/// the airspace radius. Returns `None` when fewer than two points are
/// inside. Times are re-based on the first retained point.
pub fn clip_to_airspace(track: &EnuTrack, radius_m: f64) -> Option<EnuTrack> {
    let inside = |p: &EnuPoint| p.range() <= radius_m;
    let first = track.points.iter().position(inside)?;
    let last = track.points.iter().rposition(inside)?;
    if last <= first {
        return None;
    }
    let t0 = track.points[first].t;
    let points = track.points[first..=last]
        .iter()
        .map(|p| EnuPoint { t: p.t - t0, ..*p })
        .collect();
    Some(EnuTrack {
        id: track.id.clone(),
        start_time: track.start_time + t0,
        points,
        runway: track.runway.clone(),
    })
}
