use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Bin `values` into the given edges. Bins are half-open except the
    /// last, which includes its right edge; values outside are dropped.
    pub fn new(edges: Vec<f64>, values: &[f64]) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("histogram edges must be strictly increasing"));
        }
        let b = edges.len() - 1;
        let mut counts = vec![0u64; b];
        let (lo, hi) = (edges[0], edges[b]);
        for &v in values {
            if !(v >= lo && v <= hi) {
                continue;
            }
            let idx = edges.partition_point(|&e| e <= v).saturating_sub(1).min(b - 1);
            counts[idx] += 1;
        }
        Ok(Histogram { edges, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Probability mass per bin.
    pub fn mass(&self) -> Result<Vec<f64>> {
        let total = self.total();
        if total == 0 {
            return Err(Error::invalid("empty histogram has no mass"));
        }
        Ok(self.counts.iter().map(|&c| c as f64 / total as f64).collect())
    }
}

/// Freedman–Diaconis bin edges spanning `values`. Falls back to Sturges'
/// rule when the interquartile range is zero.
pub fn freedman_diaconis_edges(values: &[f64]) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return Err(Error::invalid("cannot bin an empty sample"));
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let (lo, hi) = (v[0], v[n - 1]);
    if !(hi > lo) {
        return Ok(vec![lo - 0.5, lo + 0.5]);
    }
    let iqr = quantile(&v, 0.75) - quantile(&v, 0.25);
    let width = 2.0 * iqr / (n as f64).cbrt();
    let bins = if width > 0.0 {
        ((hi - lo) / width).ceil()
    } else {
        (n as f64).log2().ceil() + 1.0
    };
    let bins = (bins as usize).clamp(1, 10_000);
    Ok((0..=bins)
        .map(|i| if i == bins { hi } else { lo + (hi - lo) * i as f64 / bins as f64 })
        .collect())
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + f * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Histograms of two samples over shared Freedman–Diaconis edges computed
/// on their union.
pub fn shared_histograms(p: &[f64], q: &[f64]) -> Result<(Histogram, Histogram)> {
    let union: Vec<f64> = p.iter().chain(q).copied().collect();
    let edges = freedman_diaconis_edges(&union)?;
    Ok((Histogram::new(edges.clone(), p)?, Histogram::new(edges, q)?))
}

/// Jensen–Shannon divergence in bits, in `[0, 1]`.
pub fn js_divergence(p: &Histogram, q: &Histogram) -> Result<f64> {
    if p.edges != q.edges {
        return Err(Error::invalid("histograms have different edges"));
    }
    let (pm, qm) = (p.mass()?, q.mass()?);
    let mut d = 0.0;
    for (a, b) in pm.iter().zip(&qm) {
        let m = 0.5 * (a + b);
        if *a > 0.0 {
            d += 0.5 * a * (a / m).log2();
        }
        if *b > 0.0 {
            d += 0.5 * b * (b / m).log2();
        }
    }
    Ok(d.clamp(0.0, 1.0))
}
