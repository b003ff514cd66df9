//! Monotone piecewise cubic Hermite interpolation (Fritsch–Carlson
//! derivative weighting, as in the classic PCHIP routine).

use crate::error::{Error, Result};
use crate::ingest::EnuPoint;

#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    /// `x` must be strictly increasing with at least two knots.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 {
            return Err(Error::invalid("interpolation needs at least two knots"));
        }
        if y.len() != n {
            return Err(Error::Dimension { expected: n, got: y.len() });
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("interpolation knots must be strictly increasing"));
        }
        let d = derivatives(&x, &y);
        Ok(Pchip { x, y, d })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let k = self.x.partition_point(|&v| v <= t).clamp(1, n - 1) - 1;
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }
}

fn derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d[0] = edge(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

/// One-sided three-point end derivative with the shape-preserving limits.
fn edge(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// Resample a timed trajectory to `len` points at equally spaced times over
/// `[t_first, t_last]`, interpolating each coordinate against time.
pub fn pchip_resample(traj: &[EnuPoint], len: usize) -> Result<Vec<EnuPoint>> {
    if traj.len() < 2 {
        return Err(Error::invalid("resampling needs at least two points"));
    }
    if len < 2 {
        return Err(Error::invalid("resampled length must be at least 2"));
    }
    if traj.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::invalid("trajectory times must be strictly increasing"));
    }
    let t: Vec<f64> = traj.iter().map(|p| p.t).collect();
    let fx = Pchip::new(t.clone(), traj.iter().map(|p| p.x).collect())?;
    let fy = Pchip::new(t.clone(), traj.iter().map(|p| p.y).collect())?;
    let fz = Pchip::new(t.clone(), traj.iter().map(|p| p.z).collect())?;
    let (t0, t1) = (t[0], t[t.len() - 1]);
    Ok((0..len)
        .map(|i| {
            let ti = if i == len - 1 {
                t1
            } else {
                t0 + (t1 - t0) * i as f64 / (len - 1) as f64
            };
            EnuPoint::new(ti, fx.eval(ti), fy.eval(ti), fz.eval(ti))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_linear_data() {
        let traj: Vec<EnuPoint> = [0.0, 1.0, 3.0, 4.5, 9.0]
            .iter()
            .map(|&t| EnuPoint::new(t, 2.0 * t + 1.0, -t, 0.5 * t))
            .collect();
        let out = pchip_resample(&traj, 13).unwrap();
        for p in out {
            assert!((p.x - (2.0 * p.t + 1.0)).abs() < 1e-12);
            assert!((p.y + p.t).abs() < 1e-12);
            assert!((p.z - 0.5 * p.t).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolates_knots() {
        let x = vec![0.0, 1.0, 2.5, 3.0, 7.0];
        let y = vec![1.0, -2.0, 4.0, 4.0, 0.5];
        let p = Pchip::new(x.clone(), y.clone()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((p.eval(*a) - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_duplicate_times() {
        let traj = vec![
            EnuPoint::new(0.0, 0.0, 0.0, 0.0),
            EnuPoint::new(1.0, 1.0, 0.0, 0.0),
            EnuPoint::new(1.0, 2.0, 0.0, 0.0),
        ];
        assert!(pchip_resample(&traj, 5).is_err());
    }

    fn knots() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (3usize..10).prop_flat_map(|n| {
            (
                proptest::collection::vec(0.1f64..5.0, n),
                proptest::collection::vec(-10.0f64..10.0, n),
            )
        })
        .prop_map(|(dx, y)| {
            let mut x = Vec::with_capacity(dx.len());
            let mut acc = 0.0;
            for v in dx {
                acc += v;
                x.push(acc);
            }
            (x, y)
        })
    }

    proptest! {
        #[test]
        fn monotone_intervals_stay_monotone_and_bounded((x, y) in knots()) {
            let p = Pchip::new(x.clone(), y.clone()).unwrap();
            for k in 0..x.len() - 1 {
                let (lo, hi) = (y[k].min(y[k + 1]), y[k].max(y[k + 1]));
                let up = y[k + 1] >= y[k];
                let mut prev = p.eval(x[k]);
                for s in 1..=40 {
                    let t = x[k] + (x[k + 1] - x[k]) * s as f64 / 40.0;
                    let v = p.eval(t);
                    prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
                    if up { prop_assert!(v >= prev - 1e-9); } else { prop_assert!(v <= prev + 1e-9); }
                    prev = v;
                }
            }
        }

        #[test]
        fn monotone_input_gives_monotone_resample(steps in proptest::collection::vec(0.0f64..50.0, 4..30)) {
            let mut x = 0.0;
            let traj: Vec<EnuPoint> = steps.iter().enumerate().map(|(i, s)| {
                x += s;
                EnuPoint::new(i as f64 * 1.7, x, 0.0, 0.0)
            }).collect();
            let out = pchip_resample(&traj, 97).unwrap();
            for w in out.windows(2) {
                prop_assert!(w[1].x >= w[0].x - 1e-9);
            }
        }
    }
}
