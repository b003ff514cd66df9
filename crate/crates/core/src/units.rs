//! Unit conversions. Everything internal is SI (meters, seconds); feet,
//! nautical miles and knots only appear at I/O and reporting boundaries.

pub const METERS_PER_FOOT: f64 = 0.3048;
pub const METERS_PER_NM: f64 = 1852.0;
pub const MPS_PER_KNOT: f64 = METERS_PER_NM / 3600.0;

#[inline]
pub fn ft_to_m(ft: f64) -> f64 {
    ft * METERS_PER_FOOT
}

#[inline]
pub fn m_to_ft(m: f64) -> f64 {
    m / METERS_PER_FOOT
}

#[inline]
pub fn nm_to_m(nm: f64) -> f64 {
    nm * METERS_PER_NM
}

#[inline]
pub fn m_to_nm(m: f64) -> f64 {
    m / METERS_PER_NM
}

#[inline]
pub fn kts_to_mps(kts: f64) -> f64 {
    kts * MPS_PER_KNOT
}

#[inline]
pub fn mps_to_kts(mps: f64) -> f64 {
    mps / MPS_PER_KNOT
}
