//! WGS84 geodetic <-> ECEF <-> local east-north-up conversions.

use crate::units::{ft_to_m, m_to_ft};

/// Semi-major axis, meters.
pub const WGS84_A: f64 = 6_378_137.0;
/// Flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
/// First eccentricity squared.
pub const WGS84_E2: f64 = WGS84_F * (2.0 - WGS84_F);

/// Geodetic (degrees, degrees, meters above ellipsoid) to ECEF meters.
pub fn geodetic_to_ecef(lat_deg: f64, lon_deg: f64, h_m: f64) -> [f64; 3] {
    let (lat, lon) = (lat_deg.to_radians(), lon_deg.to_radians());
    let (slat, clat) = lat.sin_cos();
    let (slon, clon) = lon.sin_cos();
    let n = WGS84_A / (1.0 - WGS84_E2 * slat * slat).sqrt();
    [
        (n + h_m) * clat * clon,
        (n + h_m) * clat * slon,
        (n * (1.0 - WGS84_E2) + h_m) * slat,
    ]
}

/// ECEF meters to geodetic (degrees, degrees, meters). Fixed-point
/// iteration on latitude; converges to machine precision for points near
/// the surface in a handful of steps.
pub fn ecef_to_geodetic(ecef: [f64; 3]) -> (f64, f64, f64) {
    let [x, y, z] = ecef;
    let lon = y.atan2(x);
    let p = x.hypot(y);
    let mut lat = z.atan2(p * (1.0 - WGS84_E2));
    let mut h = 0.0;
    for _ in 0..20 {
        let slat = lat.sin();
        let n = WGS84_A / (1.0 - WGS84_E2 * slat * slat).sqrt();
        h = if lat.cos().abs() > 1e-10 {
            p / lat.cos() - n
        } else {
            z.abs() / slat.abs() - n * (1.0 - WGS84_E2)
        };
        let next = z.atan2(p * (1.0 - WGS84_E2 * n / (n + h)));
        let done = (next - lat).abs() < 1e-15;
        lat = next;
        if done {
            break;
        }
    }
    (lat.to_degrees(), lon.to_degrees(), h)
}

/// A local tangent-plane frame anchored at a geodetic origin.
#[derive(Debug, Clone, Copy)]
pub struct EnuFrame {
    origin_ecef: [f64; 3],
    // rows: east, north, up unit vectors in ECEF
    rot: [[f64; 3]; 3],
}

impl EnuFrame {
    /// `origin_alt_ft` is the reference altitude in feet.
    pub fn new(origin_lat: f64, origin_lon: f64, origin_alt_ft: f64) -> Self {
        let (lat, lon) = (origin_lat.to_radians(), origin_lon.to_radians());
        let (slat, clat) = lat.sin_cos();
        let (slon, clon) = lon.sin_cos();
        EnuFrame {
            origin_ecef: geodetic_to_ecef(origin_lat, origin_lon, ft_to_m(origin_alt_ft)),
            rot: [
                [-slon, clon, 0.0],
                [-slat * clon, -slat * slon, clat],
                [clat * clon, clat * slon, slat],
            ],
        }
    }

    /// Geodetic (degrees, feet) to ENU meters.
    pub fn to_enu(&self, lat: f64, lon: f64, alt_ft: f64) -> [f64; 3] {
        let p = geodetic_to_ecef(lat, lon, ft_to_m(alt_ft));
        let d = [
            p[0] - self.origin_ecef[0],
            p[1] - self.origin_ecef[1],
            p[2] - self.origin_ecef[2],
        ];
        let r = &self.rot;
        [
            r[0][0] * d[0] + r[0][1] * d[1] + r[0][2] * d[2],
            r[1][0] * d[0] + r[1][1] * d[1] + r[1][2] * d[2],
            r[2][0] * d[0] + r[2][1] * d[1] + r[2][2] * d[2],
        ]
    }

    /// ENU meters back to geodetic (degrees, degrees, feet).
    pub fn to_geodetic(&self, enu: [f64; 3]) -> (f64, f64, f64) {
        let r = &self.rot;
        // inverse rotation is the transpose
        let ecef = [
            self.origin_ecef[0] + r[0][0] * enu[0] + r[1][0] * enu[1] + r[2][0] * enu[2],
            self.origin_ecef[1] + r[0][1] * enu[0] + r[1][1] * enu[1] + r[2][1] * enu[2],
            self.origin_ecef[2] + r[0][2] * enu[0] + r[1][2] * enu[1] + r[2][2] * enu[2],
        ];
        let (lat, lon, h) = ecef_to_geodetic(ecef);
        (lat, lon, m_to_ft(h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::nm_to_m;
    use proptest::prelude::*;

    /// Vincenty inverse on the WGS84 ellipsoid, meters.
    fn vincenty(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
        let b = WGS84_A * (1.0 - WGS84_F);
        let f = WGS84_F;
        let l = (lon2 - lon1).to_radians();
        let u1 = ((1.0 - f) * lat1.to_radians().tan()).atan();
        let u2 = ((1.0 - f) * lat2.to_radians().tan()).atan();
        let (su1, cu1) = u1.sin_cos();
        let (su2, cu2) = u2.sin_cos();
        let mut lambda = l;
        let (mut s_sig, mut c_sig, mut sig, mut c2a, mut c2sm);
        loop {
            let (sl, cl) = lambda.sin_cos();
            s_sig = ((cu2 * sl).powi(2) + (cu1 * su2 - su1 * cu2 * cl).powi(2)).sqrt();
            c_sig = su1 * su2 + cu1 * cu2 * cl;
            sig = s_sig.atan2(c_sig);
            let sa = cu1 * cu2 * sl / s_sig;
            c2a = 1.0 - sa * sa;
            c2sm = c_sig - 2.0 * su1 * su2 / c2a;
            let c = f / 16.0 * c2a * (4.0 + f * (4.0 - 3.0 * c2a));
            let prev = lambda;
            lambda = l + (1.0 - c) * f * sa
                * (sig + c * s_sig * (c2sm + c * c_sig * (-1.0 + 2.0 * c2sm * c2sm)));
            if (lambda - prev).abs() < 1e-13 {
                break;
            }
        }
        let u2b = c2a * (WGS84_A * WGS84_A - b * b) / (b * b);
        let a_ = 1.0 + u2b / 16384.0 * (4096.0 + u2b * (-768.0 + u2b * (320.0 - 175.0 * u2b)));
        let b_ = u2b / 1024.0 * (256.0 + u2b * (-128.0 + u2b * (74.0 - 47.0 * u2b)));
        let ds = b_ * s_sig
            * (c2sm + b_ / 4.0 * (c_sig * (-1.0 + 2.0 * c2sm * c2sm)
                - b_ / 6.0 * c2sm * (-3.0 + 4.0 * s_sig * s_sig) * (-3.0 + 4.0 * c2sm * c2sm)));
        b * a_ * (sig - ds)
    }

    #[test]
    fn origin_maps_to_zero() {
        let f = EnuFrame::new(40.6413, -73.7781, 13.0);
        let p = f.to_enu(40.6413, -73.7781, 13.0);
        assert!(p.iter().all(|v| v.abs() < 1e-6), "{p:?}");
    }

    #[test]
    fn due_north_has_no_east_component() {
        let f = EnuFrame::new(40.6413, -73.7781, 13.0);
        let p = f.to_enu(40.6513, -73.7781, 13.0);
        assert!(p[0].abs() < 1.0);
        assert!(p[1] > 0.0);
    }

    #[test]
    fn matches_independent_enu_formula() {
        // Direct ECEF difference rotated by the textbook ENU matrix, with
        // the ellipsoid formulas written out again here.
        let (lat0, lon0, h0) = (40.6413f64, -73.7781f64, 13.0 * 0.3048);
        let (lat, lon, h) = (40.70f64, -73.70f64, 0.0);
        let a = 6_378_137.0;
        let e2 = 6.694_379_990_141_33e-3;
        let ecef = |la: f64, lo: f64, hh: f64| {
            let (la, lo) = (la.to_radians(), lo.to_radians());
            let n = a / (1.0 - e2 * la.sin().powi(2)).sqrt();
            [
                (n + hh) * la.cos() * lo.cos(),
                (n + hh) * la.cos() * lo.sin(),
                (n * (1.0 - e2) + hh) * la.sin(),
            ]
        };
        let p0 = ecef(lat0, lon0, h0);
        let p = ecef(lat, lon, h);
        let d = [p[0] - p0[0], p[1] - p0[1], p[2] - p0[2]];
        let (phi, lam) = (lat0.to_radians(), lon0.to_radians());
        let e = -lam.sin() * d[0] + lam.cos() * d[1];
        let nn = -phi.sin() * lam.cos() * d[0] - phi.sin() * lam.sin() * d[1] + phi.cos() * d[2];
        let u = phi.cos() * lam.cos() * d[0] + phi.cos() * lam.sin() * d[1] + phi.sin() * d[2];

        let got = EnuFrame::new(40.6413, -73.7781, 13.0).to_enu(40.70, -73.70, 0.0);
        assert!((got[0] - e).abs() < 0.1);
        assert!((got[1] - nn).abs() < 0.1);
        assert!((got[2] - u).abs() < 0.1);
        // sanity on magnitude: about 6.6 km east, 6.5 km north
        assert!((got[0] - 6590.0).abs() < 50.0, "{got:?}");
    }

    #[test]
    fn horizontal_distance_matches_geodesic() {
        let f = EnuFrame::new(40.6413, -73.7781, 13.0);
        let pts = [
            (40.90, -73.60),
            (40.40, -73.95),
            (40.64, -73.30),
            (40.95, -74.10),
            (40.30, -73.50),
        ];
        for &(la1, lo1) in &pts {
            for &(la2, lo2) in &pts {
                if (la1, lo1) == (la2, lo2) {
                    continue;
                }
                let a = f.to_enu(la1, lo1, 0.0);
                let b = f.to_enu(la2, lo2, 0.0);
                let enu = (a[0] - b[0]).hypot(a[1] - b[1]);
                let geo = vincenty(la1, lo1, la2, lo2);
                assert!(((enu - geo) / geo).abs() < 1e-3, "{enu} vs {geo}");
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip_within_100_nm(
            e in -nm_to_m(70.0)..nm_to_m(70.0),
            n in -nm_to_m(70.0)..nm_to_m(70.0),
            alt_ft in -500.0f64..45_000.0,
        ) {
            let f = EnuFrame::new(40.6413, -73.7781, 13.0);
            let (lat, lon, _) = f.to_geodetic([e, n, 0.0]);
            let p = f.to_enu(lat, lon, alt_ft);
            let (lat2, lon2, alt2) = f.to_geodetic(p);
            prop_assert!((lat - lat2).abs() < 1e-9);
            prop_assert!((lon - lon2).abs() < 1e-9);
            prop_assert!((alt_ft - alt2).abs() < 1e-3);
        }
    }
}
