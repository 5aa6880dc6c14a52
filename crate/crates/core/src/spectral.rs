//! Equal-time correlation matrices, their eigenmode decomposition and the
//! Marchenko-Pastur reference spectrum.
//!
//! Correlations use population moments over the analysed window:
//! C_xy = ⟨r_x r_y⟩ − ⟨r_x⟩⟨r_y⟩ over σ_x σ_y. The spectrum of C is split
//! into the market mode (largest eigenvalue), a fixed number of group
//! modes and the random bulk; summing the three parts restores C exactly.
//! For pure noise with Q = T/N > 1 the bulk eigenvalue density follows
//! the Marchenko-Pastur law with edges (1 ± 1/√Q)².

use crate::error::{Error, Result};
use crate::hist::Histogram;
use crate::linalg;
use crate::panel::ReturnPanel;
use crate::textio::write_labeled_matrix;
use ndarray::{Array2, ArrayView1};
use serde::Serialize;
use std::io::{self, Write};

/// Symmetric correlation matrix with unit diagonal.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    tickers: Vec<String>,
    values: Array2<f64>,
    /// Observations behind each coefficient.
    window_len: usize,
}

impl CorrelationMatrix {
    /// Pearson correlations of all series pairs in `panel`.
    pub fn from_panel(panel: &ReturnPanel) -> Result<Self> {
        let r = panel.values();
        let n = panel.n_series();
        let t = panel.n_obs();
        if t < 2 {
            return Err(Error::InsufficientData {
                detail: format!("correlation needs at least 2 observations, panel has {t}"),
            });
        }

        let mut centered = r.clone();
        let mut sigma = vec![0.0f64; n];
        for i in 0..n {
            let mean = r.row(i).sum() / t as f64;
            let mut var = 0.0;
            for j in 0..t {
                let c = r[[i, j]] - mean;
                centered[[i, j]] = c;
                var += c * c;
            }
            var /= t as f64;
            if var <= 0.0 {
                return Err(Error::ZeroVariance { ticker: panel.tickers()[i].clone() });
            }
            sigma[i] = var.sqrt();
        }

        let mut values = Array2::zeros((n, n));
        for i in 0..n {
            values[[i, i]] = 1.0;
            for j in i + 1..n {
                let mut cov = 0.0;
                for k in 0..t {
                    cov += centered[[i, k]] * centered[[j, k]];
                }
                cov /= t as f64;
                let c = (cov / (sigma[i] * sigma[j])).clamp(-1.0, 1.0);
                values[[i, j]] = c;
                values[[j, i]] = c;
            }
        }
        Ok(CorrelationMatrix { tickers: panel.tickers().to_vec(), values, window_len: t })
    }

    /// Wraps an existing matrix. Requires a square symmetric matrix with
    /// unit diagonal, all entries in [−1, 1], one label per row.
    pub fn from_parts(tickers: Vec<String>, values: Array2<f64>, window_len: usize) -> Result<Self> {
        let n = tickers.len();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::InvalidParameter {
                detail: format!(
                    "correlation matrix is {}x{} but there are {n} labels",
                    values.nrows(),
                    values.ncols()
                ),
            });
        }
        for i in 0..n {
            if (values[[i, i]] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter {
                    detail: format!("diagonal entry {i} is {} rather than 1", values[[i, i]]),
                });
            }
            for j in 0..n {
                let v = values[[i, j]];
                if !v.is_finite() || v.abs() > 1.0 + 1e-12 {
                    return Err(Error::OutOfRange { what: "correlation coefficient".into(), value: v });
                }
                if (v - values[[j, i]]).abs() > 1e-12 {
                    return Err(Error::InvalidParameter {
                        detail: format!("matrix is not symmetric at ({i},{j})"),
                    });
                }
            }
        }
        Ok(CorrelationMatrix { tickers, values, window_len })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.tickers.len()
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    /// Strictly upper-triangular coefficients in row-major order.
    pub fn off_diagonal_upper(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.values[[i, j]]);
            }
        }
        out
    }

    /// Histogram of the off-diagonal coefficients over the fixed support
    /// [−1, 1].
    pub fn coefficient_distribution(&self, bins: usize) -> Result<Histogram> {
        Histogram::from_values(&self.off_diagonal_upper(), bins, Some((-1.0, 1.0)))
    }

    /// Labeled CSV of the full matrix.
    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        write_labeled_matrix(w, &self.tickers, &self.values)
    }
}

/// Marchenko-Pastur bulk edges for an N-series, T-observation null panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MpBounds {
    pub q: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Needs more observations than series (Q = T/N > 1).
pub fn mp_bounds(n_series: usize, n_obs: usize) -> Result<MpBounds> {
    if n_series == 0 {
        return Err(Error::InvalidParameter { detail: "Marchenko-Pastur bounds need at least one series".into() });
    }
    if n_obs <= n_series {
        return Err(Error::InsufficientData {
            detail: format!(
                "Marchenko-Pastur law here requires T > N, got N = {n_series}, T = {n_obs}"
            ),
        });
    }
    let q = n_obs as f64 / n_series as f64;
    let root = 1.0 / q.sqrt();
    Ok(MpBounds {
        q,
        lambda_min: (1.0 - root) * (1.0 - root),
        lambda_max: (1.0 + root) * (1.0 + root),
    })
}

impl MpBounds {
    /// Bulk eigenvalue density at `lambda`; zero outside the edges.
    pub fn density(&self, lambda: f64) -> f64 {
        if lambda <= self.lambda_min || lambda >= self.lambda_max {
            return 0.0;
        }
        let spread = (self.lambda_max - lambda) * (lambda - self.lambda_min);
        self.q / (2.0 * std::f64::consts::PI) * spread.sqrt() / lambda
    }
}

/// Split of a correlation matrix into market, group and random parts.
#[derive(Debug, Clone)]
pub struct ModeDecomposition {
    pub tickers: Vec<String>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Column k pairs with `eigenvalues[k]`.
    pub eigenvectors: Array2<f64>,
    pub n_group: usize,
    /// λ_0 u_0 u_0ᵀ.
    pub market: Array2<f64>,
    /// Modes 1 ..= n_group.
    pub group: Array2<f64>,
    /// Everything below the group band.
    pub random: Array2<f64>,
}

/// Eigenmode split with `n_group` group modes under the market mode.
pub fn decompose(c: &CorrelationMatrix, n_group: usize) -> Result<ModeDecomposition> {
    let n = c.n();
    if n < 2 {
        return Err(Error::InsufficientData {
            detail: format!("mode decomposition needs at least 2 series, got {n}"),
        });
    }
    if n_group > n - 1 {
        return Err(Error::InvalidParameter {
            detail: format!("{n_group} group modes plus the market mode exceed {n} series"),
        });
    }
    let eig = linalg::eigh(c.values())?;
    let mut parts = [Array2::zeros((n, n)), Array2::zeros((n, n)), Array2::zeros((n, n))];
    for k in 0..n {
        let part = if k == 0 {
            0
        } else if k <= n_group {
            1
        } else {
            2
        };
        let lambda = eig.values[k];
        let v = eig.vectors.column(k);
        for i in 0..n {
            for j in 0..n {
                parts[part][[i, j]] += lambda * v[i] * v[j];
            }
        }
    }
    let [market, group, random] = parts;
    Ok(ModeDecomposition {
        tickers: c.tickers().to_vec(),
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
        n_group,
        market,
        group,
        random,
    })
}

/// Σ a_i⁴ for a unit vector: 1/N when weight is spread evenly, 1 when it
/// sits on a single component.
pub fn inverse_participation_ratio(v: ArrayView1<f64>) -> f64 {
    v.iter().map(|&a| a * a * a * a).sum()
}

impl ModeDecomposition {
    pub fn n(&self) -> usize {
        self.tickers.len()
    }

    /// IPR of eigenvector `k`.
    pub fn ipr(&self, k: usize) -> f64 {
        inverse_participation_ratio(self.eigenvectors.column(k))
    }

    /// Spectrum summary: eigenvalues, per-mode IPR and the noise-bulk
    /// edges when they apply (`mp_bounds` is null otherwise).
    pub fn summary_json(&self, bounds: Option<&MpBounds>) -> serde_json::Value {
        let iprs: Vec<f64> = (0..self.n()).map(|k| self.ipr(k)).collect();
        serde_json::json!({
            "n": self.n(),
            "n_group": self.n_group,
            "eigenvalues": self.eigenvalues,
            "ipr": iprs,
            "trace": self.eigenvalues.iter().sum::<f64>(),
            "mp_bounds": bounds,
        })
    }

    /// Labeled CSV of one component matrix.
    pub fn write_component_csv<W: Write>(&self, w: W, part: &Array2<f64>) -> io::Result<()> {
        write_labeled_matrix(w, &self.tickers, part)
    }
}
