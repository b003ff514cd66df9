//! Helpers over timed point sequences.

use crate::ingest::EnuPoint;

/// Sum of consecutive 3-D segment lengths.
pub fn path_length(points: &[EnuPoint]) -> f64 {
    points.windows(2).map(|w| w[0].dist(&w[1])).sum()
}

pub fn horizontal_length(points: &[EnuPoint]) -> f64 {
    points.windows(2).map(|w| w[0].horizontal_dist(&w[1])).sum()
}

pub fn duration(points: &[EnuPoint]) -> f64 {
    match (points.first(), points.last()) {
        (Some(a), Some(b)) => b.t - a.t,
        _ => 0.0,
    }
}

/// Position at time `t` by linear interpolation; `None` outside the
/// trajectory's time span.
pub fn position_at(points: &[EnuPoint], t: f64) -> Option<[f64; 3]> {
    let first = points.first()?;
    let last = points.last()?;
    if t < first.t || t > last.t {
        return None;
    }
    let k = points.partition_point(|p| p.t <= t);
    if k == 0 {
        return Some(first.pos());
    }
    if k == points.len() {
        return Some(last.pos());
    }
    let (a, b) = (&points[k - 1], &points[k]);
    let s = (t - a.t) / (b.t - a.t);
    Some([
        a.x + s * (b.x - a.x),
        a.y + s * (b.y - a.y),
        a.z + s * (b.z - a.z),
    ])
}

/// Shift all timestamps by `dt`.
pub fn shifted(points: &[EnuPoint], dt: f64) -> Vec<EnuPoint> {
    points.iter().map(|p| EnuPoint { t: p.t + dt, ..*p }).collect()
}
