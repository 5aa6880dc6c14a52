//! Fixed-width histograms for coefficient and influence distributions.

use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    /// Bin edges, ascending, `bins + 1` entries.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// counts / (n * bin_width), so the histogram integrates to 1.
    pub densities: Vec<f64>,
    pub n: u64,
}

impl Histogram {
    /// Bins `values` into `bins` equal-width cells. With `range` of `None`
    /// the data range is used (widened symmetrically when all values
    /// coincide); values on the upper edge land in the last bin and values
    /// outside an explicit range are clamped into the end bins.
    pub fn from_values(values: &[f64], bins: usize, range: Option<(f64, f64)>) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidParameter { detail: "histogram needs at least one bin".into() });
        }
        if values.is_empty() {
            return Err(Error::InvalidParameter { detail: "histogram needs at least one value".into() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter { detail: "histogram values must be finite".into() });
        }
        let (lo, hi) = match range {
            Some((lo, hi)) => {
                if lo.is_nan() || hi.is_nan() || lo >= hi {
                    return Err(Error::InvalidParameter {
                        detail: "histogram range must satisfy lo < hi".into(),
                    });
                }
                (lo, hi)
            }
            None => {
                let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if lo == hi {
                    (lo - 0.5, hi + 0.5)
                } else {
                    (lo, hi)
                }
            }
        };

        let width = (hi - lo) / bins as f64;
        let mut edges = Vec::with_capacity(bins + 1);
        for k in 0..=bins {
            edges.push(lo + width * k as f64);
        }
        let mut counts = vec![0u64; bins];
        for &v in values {
            let raw = ((v - lo) / width).floor();
            let idx = (raw as i64).clamp(0, bins as i64 - 1) as usize;
            counts[idx] += 1;
        }
        let n = values.len() as u64;
        let densities = counts.iter().map(|&c| c as f64 / (n as f64 * width)).collect();
        Ok(Histogram { edges, counts, densities, n })
    }
}
