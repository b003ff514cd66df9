use serde::{Deserialize, Serialize};

use super::{flight_to_enu, AirspaceConfig, EnuTrack, Flight, FlightClass};
use crate::error::{Error, Result};
use crate::units::{nm_to_m, METERS_PER_NM};

/// Arrival, departure or overflight from the net change in range to the
/// airport and the altitude at the track ends (inside the airspace only).
///
/// An arrival closes range by at least `min_range_change_nm` and ends
/// within `landing_radius_nm` of the origin below `landing_ceiling_ft`
/// above the reference altitude. A departure is the mirror image.
pub fn classify_flight(flight: &Flight, config: &AirspaceConfig) -> Result<FlightClass> {
    let enu = flight_to_enu(flight, &config.frame());
    let radius = config.radius_m();
    let inside = |p: &&super::EnuPoint| p.range() <= radius;
    let first_idx = enu.points.iter().position(|p| inside(&p));
    let last_idx = enu.points.iter().rposition(|p| inside(&p));
    let (first_idx, last_idx) = match (first_idx, last_idx) {
        (Some(a), Some(b)) if b > a => (a, b),
        _ => {
            return Err(Error::Classification(format!(
                "flight `{}` has < 2 points inside the airspace",
                flight.id
            )))
        }
    };
    let first = &enu.points[first_idx];
    let last = &enu.points[last_idx];

    let agl = |i: usize| flight.points[i].alt - config.origin_alt_ft;
    let min_change = nm_to_m(config.min_range_change_nm);
    let near = nm_to_m(config.landing_radius_nm);
    let ceiling = config.landing_ceiling_ft;

    let inbound = first.range() - last.range() >= min_change;
    let outbound = last.range() - first.range() >= min_change;
    let landed = last.range() <= near && agl(last_idx) <= ceiling;
    let took_off = first.range() <= near && agl(first_idx) <= ceiling;

    Ok(if inbound && landed {
        FlightClass::Arrival
    } else if outbound && took_off {
        FlightClass::Departure
    } else {
        FlightClass::Overflight
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunwayHeading {
    pub name: String,
    /// True heading of the landing direction, degrees.
    pub heading_deg: f64,
}

/// Runway for an arrival track. An input label wins; otherwise the runway
/// whose heading is closest to the course flown over the final 1 NM.
pub fn assign_runway(track: &EnuTrack, runways: &[RunwayHeading]) -> Option<String> {
    if let Some(label) = &track.runway {
        return Some(label.clone());
    }
    let pts = &track.points;
    let last = pts.last()?;
    let mut travelled = 0.0;
    let mut start = pts.len() - 1;
    while start > 0 && travelled < METERS_PER_NM {
        travelled += pts[start].horizontal_dist(&pts[start - 1]);
        start -= 1;
    }
    let (dx, dy) = (last.x - pts[start].x, last.y - pts[start].y);
    if dx == 0.0 && dy == 0.0 {
        return None;
    }
    let course = dx.atan2(dy).to_degrees().rem_euclid(360.0);
    let ang = |h: f64| {
        let d = (course - h).rem_euclid(360.0);
        d.min(360.0 - d)
    };
    runways
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| ang(a.heading_deg).total_cmp(&ang(b.heading_deg)).then(i.cmp(j)))
        .map(|(_, r)| r.name.clone())
}
