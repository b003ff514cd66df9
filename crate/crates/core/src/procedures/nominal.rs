use nalgebra::DMatrix;

use super::{Procedure, ProcedureKind, Waypoint};
use crate::error::{Error, Result};
use crate::ingest::{enu_to_wgs84, AirspaceConfig, EnuPoint, EnuTrack};
use crate::kmeans::kmeans;
use crate::preprocess::pchip_resample;
use crate::rng::Rng;

const RESTARTS: usize = 20;

/// Cluster arrival tracks into `k` candidate radar-vector paths.
///
/// Each track is resampled to `len` points; k-means runs on the flattened
/// positions. Each returned procedure is a cluster mean with its mean
/// (start-relative) times attached, named `{prefix}{index}` and weighted by
/// the fraction of tracks in the cluster. When the tracks cannot support
/// `k` distinct clusters the result has fewer entries.
pub fn extract_nominal_paths(
    tracks: &[EnuTrack],
    k: usize,
    len: usize,
    prefix: &str,
    airspace: &AirspaceConfig,
    rng: &mut Rng,
) -> Result<Vec<Procedure>> {
    let resampled: Vec<Vec<EnuPoint>> = tracks
        .iter()
        .map(|t| pchip_resample(&t.points, len))
        .collect::<Result<_>>()?;
    nominal_paths_from_samples(&resampled, k, prefix, airspace, rng)
}

/// As [`extract_nominal_paths`] for samples that already share one length;
/// the samples are clustered as given.
pub fn nominal_paths_from_samples(
    samples: &[Vec<EnuPoint>],
    k: usize,
    prefix: &str,
    airspace: &AirspaceConfig,
    rng: &mut Rng,
) -> Result<Vec<Procedure>> {
    if k > samples.len() {
        return Err(Error::invalid(format!(
            "cannot extract {k} nominal paths from {} flights",
            samples.len()
        )));
    }
    let len = samples.first().map_or(0, Vec::len);
    if len < 2 || samples.iter().any(|s| s.len() != len) {
        return Err(Error::invalid("nominal path samples need one common length of at least 2"));
    }
    let resampled = samples;
    let data = DMatrix::from_fn(resampled.len(), 3 * len, |r, c| {
        let p = &resampled[r][c / 3];
        [p.x, p.y, p.z][c % 3]
    });
    let km = kmeans(&data, k, RESTARTS, rng)?;
    let sizes = km.cluster_sizes();
    let m = samples.len() as f64;
    let mut out = Vec::with_capacity(km.k());
    for (c, &size) in sizes.iter().enumerate() {
        let mut times = vec![0.0; len];
        for (r, traj) in resampled.iter().enumerate() {
            if km.labels[r] == c {
                for (slot, p) in times.iter_mut().zip(traj) {
                    *slot += p.t - traj[0].t;
                }
            }
        }
        times.iter_mut().for_each(|t| *t /= size as f64);
        let waypoints = (0..len)
            .map(|i| {
                let enu = [km.centers[(c, 3 * i)], km.centers[(c, 3 * i + 1)], km.centers[(c, 3 * i + 2)]];
                let (lat, lon, alt) = enu_to_wgs84(enu, airspace);
                Waypoint { lat, lon, alt: Some(alt) }
            })
            .collect();
        out.push(Procedure {
            name: format!("{prefix}{c}"),
            kind: ProcedureKind::RadarVector,
            waypoints,
            frequency: size as f64 / m,
            times: Some(times),
            runway: None,
        });
    }
    Ok(out)
}
