//! Track file reading and writing.
//!
//! Format: UTF-8 CSV with header `id,time,lat,lon,alt`, optional columns
//! `gs` (knots), `vr` (feet/min) and `runway`. Times are seconds.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{Flight, TrackPoint};
use crate::error::{Error, Result};

/// A rejected row; the rest of the file is still parsed.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordError {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedTracks {
    pub flights: Vec<Flight>,
    pub errors: Vec<RecordError>,
}

pub fn parse_tracks(path: impl AsRef<Path>) -> Result<ParsedTracks> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_tracks(file)
}

pub fn read_tracks_str(text: &str) -> Result<ParsedTracks> {
    read_tracks(text.as_bytes())
}

struct Columns {
    id: usize,
    time: usize,
    lat: usize,
    lon: usize,
    alt: usize,
    gs: Option<usize>,
    vr: Option<usize>,
    runway: Option<usize>,
}

fn read_tracks<R: Read>(reader: R) -> Result<ParsedTracks> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("unreadable track header: {e}")))?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let need = |name: &str| {
        find(name).ok_or_else(|| Error::Parse(format!("track file lacks required column `{name}`")))
    };
    let cols = Columns {
        id: need("id")?,
        time: need("time")?,
        lat: need("lat")?,
        lon: need("lon")?,
        alt: need("alt")?,
        gs: find("gs"),
        vr: find("vr"),
        runway: find("runway"),
    };

    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, (Vec<TrackPoint>, Option<String>)> = HashMap::new();
    let mut errors = Vec::new();

    for record in rdr.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                    return Err(Error::Parse(format!("unreadable track file: {e}")));
                }
                let line = e.position().map_or(0, |p| p.line());
                errors.push(RecordError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        match parse_record(&record, &cols) {
            Ok((id, point, runway)) => {
                let entry = groups.entry(id.clone()).or_insert_with(|| {
                    order.push(id);
                    (Vec::new(), None)
                });
                entry.0.push(point);
                if entry.1.is_none() {
                    entry.1 = runway;
                }
            }
            Err(message) => errors.push(RecordError { line, message }),
        }
    }

    let mut flights = Vec::with_capacity(order.len());
    for id in order {
        let (mut points, runway) = groups.remove(&id).expect("grouped id");
        // stable: among equal timestamps the first row in the file wins
        points.sort_by(|a, b| a.time.total_cmp(&b.time));
        points.dedup_by(|b, a| a.time == b.time);
        if points.len() < 2 {
            errors.push(RecordError {
                line: 0,
                message: format!("flight `{id}` has fewer than two distinct timestamps"),
            });
            continue;
        }
        flights.push(Flight {
            id,
            points,
            class: None,
            runway,
        });
    }
    Ok(ParsedTracks { flights, errors })
}

fn parse_record(
    record: &csv::StringRecord,
    cols: &Columns,
) -> std::result::Result<(String, TrackPoint, Option<String>), String> {
    let field = |i: usize| record.get(i).unwrap_or("");
    let num = |i: usize, name: &str| -> std::result::Result<f64, String> {
        field(i)
            .parse::<f64>()
            .map_err(|_| format!("bad `{name}` value `{}`", field(i)))
    };
    let opt = |i: Option<usize>, name: &str| -> std::result::Result<Option<f64>, String> {
        match i.map(field) {
            None | Some("") => Ok(None),
            Some(s) => s
                .parse::<f64>()
                .map(Some)
                .map_err(|_| format!("bad `{name}` value `{s}`")),
        }
    };
    let id = field(cols.id);
    if id.is_empty() {
        return Err("empty flight id".into());
    }
    let point = TrackPoint {
        time: num(cols.time, "time")?,
        lat: num(cols.lat, "lat")?,
        lon: num(cols.lon, "lon")?,
        alt: num(cols.alt, "alt")?,
        ground_speed: opt(cols.gs, "gs")?,
        vertical_rate: opt(cols.vr, "vr")?,
    };
    point.validate().map_err(|e| e.to_string())?;
    let runway = cols
        .runway
        .map(field)
        .filter(|s| !s.is_empty())
        .map(str::to_owned);
    Ok((id.to_owned(), point, runway))
}

/// Write flights in the track file format.
pub fn write_tracks<W: Write>(out: W, flights: &[Flight]) -> Result<()> {
    let with_runway = flights.iter().any(|f| f.runway.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id", "time", "lat", "lon", "alt"];
    if with_runway {
        header.push("runway");
    }
    let csv_err = |e: csv::Error| Error::Parse(format!("writing tracks: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for f in flights {
        for p in &f.points {
            let mut row = vec![
                f.id.clone(),
                p.time.to_string(),
                format!("{:.8}", p.lat),
                format!("{:.8}", p.lon),
                format!("{:.2}", p.alt),
            ];
            if with_runway {
                row.push(f.runway.clone().unwrap_or_default());
            }
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::Parse(format!("writing tracks: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_rows_by_id() {
        let text = "id,time,lat,lon,alt\n\
                    a,0,40.0,-73.0,1000\nb,0,41.0,-73.0,2000\na,1,40.1,-73.0,900\n\
                    b,1,41.1,-73.0,1900\na,2,40.2,-73.0,800\nb,2,41.2,-73.0,1800\n";
        let parsed = read_tracks_str(text).unwrap();
        assert!(parsed.errors.is_empty());
        assert_eq!(parsed.flights.len(), 2);
        assert!(parsed.flights.iter().all(|f| f.points.len() == 3));
        assert_eq!(parsed.flights[0].id, "a");
    }

    #[test]
    fn out_of_order_rows_are_sorted() {
        let text = "id,time,lat,lon,alt\na,5,40.0,-73.0,0\na,1,40.1,-73.0,0\na,3,40.2,-73.0,0\n";
        let f = &read_tracks_str(text).unwrap().flights[0];
        let times: Vec<f64> = f.points.iter().map(|p| p.time).collect();
        assert_eq!(times, vec![1.0, 3.0, 5.0]);
    }

    #[test]
    fn invalid_latitude_row_is_rejected_and_rest_kept() {
        let text = "id,time,lat,lon,alt\na,0,40.0,-73.0,0\na,1,95.0,-73.0,0\na,2,40.2,-73.0,0\n";
        let parsed = read_tracks_str(text).unwrap();
        assert_eq!(parsed.errors.len(), 1);
        assert_eq!(parsed.errors[0].line, 3);
        assert_eq!(parsed.flights[0].points.len(), 2);
    }

    #[test]
    fn duplicate_timestamps_keep_first() {
        let text = "id,time,lat,lon,alt\na,0,40.0,-73.0,0\na,1,40.5,-73.0,0\na,1,40.9,-73.0,0\n";
        let f = &read_tracks_str(text).unwrap().flights[0];
        assert_eq!(f.points.len(), 2);
        assert_eq!(f.points[1].lat, 40.5);
    }

    #[test]
    fn optional_columns_and_malformed_numbers() {
        let text = "id,time,lat,lon,alt,gs,vr\na,0,40,-73,0,140,\na,x,40,-73,0,,\na,2,40,-73,0,,-700\n";
        let parsed = read_tracks_str(text).unwrap();
        assert_eq!(parsed.errors.len(), 1);
        let f = &parsed.flights[0];
        assert_eq!(f.points[0].ground_speed, Some(140.0));
        assert_eq!(f.points[1].vertical_rate, Some(-700.0));
    }

    #[test]
    fn missing_required_column_is_fatal() {
        assert!(read_tracks_str("id,time,lat,lon\na,0,1,2\n").is_err());
        assert!(parse_tracks("/nonexistent/tracks.csv").is_err());
    }

    #[test]
    fn write_then_read() {
        let flights = vec![Flight {
            id: "x1".into(),
            points: vec![
                TrackPoint::new(0.0, 40.5, -73.5, 3000.0),
                TrackPoint::new(4.5, 40.51, -73.49, 2950.0),
            ],
            class: None,
            runway: Some("13L".into()),
        }];
        let mut buf = Vec::new();
        write_tracks(&mut buf, &flights).unwrap();
        let back = read_tracks_str(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.flights, flights);
    }
}
