//! Low-dimensional maps of a distance matrix.
//!
//! Classical scaling double-centers the squared distances,
//! B = −½ J D² J, and places coordinate t at √λ_t times eigenvector t of
//! B. Only eigenvalues above a relative floor carry coordinates; the
//! trailing columns stay zero when the spectrum runs out. The optional
//! refinement polishes the configuration by stress majorization (Guttman
//! transform) until the relative improvement drops below 1e−9.

use super::DistanceMatrix;
use crate::error::{Error, Result};
use crate::linalg;
use crate::textio::sig15;
use ndarray::Array2;
use std::io::{self, Write};

const SMACOF_MAX_ITERATIONS: usize = 500;
const SMACOF_RELATIVE_TOLERANCE: f64 = 1e-9;

/// Embedded configuration plus the spectrum diagnostics behind it.
#[derive(Debug, Clone)]
pub struct MdsEmbedding {
    tickers: Vec<String>,
    /// One row per series, one column per requested dimension.
    coordinates: Array2<f64>,
    /// Σ_{i<j} (d_ij − ‖x_i − x_j‖)².
    pub stress: f64,
    /// Full eigenvalue spectrum of the centered matrix, descending.
    pub eigen_spectrum: Vec<f64>,
    /// Coordinate columns actually backed by positive eigenvalues.
    pub dims_used: usize,
    /// Σ|λ₋| / Σ|λ|: how far the distances are from Euclidean.
    pub negative_mass: f64,
    pub note: Option<String>,
}

/// Embeds `d` into `dims` dimensions (1 ≤ dims < n). `refine` switches
/// the majorization polish on.
pub fn mds(d: &DistanceMatrix, dims: usize, refine: bool) -> Result<MdsEmbedding> {
    let n = d.n();
    if dims == 0 || dims >= n {
        return Err(Error::InvalidParameter {
            detail: format!("embedding dimension must lie in 1..{n} for {n} series, got {dims}"),
        });
    }
    let dv = d.values();

    // B = −½ J D² J by double centering.
    let mut sq = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            sq[[i, j]] = dv[[i, j]] * dv[[i, j]];
        }
    }
    let row_mean: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    let mut b = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            b[[i, j]] = -0.5 * (sq[[i, j]] - row_mean[i] - row_mean[j] + grand);
        }
    }

    let eig = linalg::eigh(&b)?;
    let total_mass: f64 = eig.values.iter().map(|l| l.abs()).sum();
    let negative_mass = if total_mass > 0.0 {
        eig.values.iter().filter(|&&l| l < 0.0).map(|l| -l).sum::<f64>() / total_mass
    } else {
        0.0
    };

    let floor = eig.values[0].max(0.0) * 1e-12;
    let positive = eig.values.iter().take_while(|&&l| l > floor).count();
    let dims_used = positive.min(dims);
    let mut coordinates = Array2::zeros((n, dims));
    for t in 0..dims_used {
        let scale = eig.values[t].sqrt();
        for i in 0..n {
            coordinates[[i, t]] = eig.vectors[[i, t]] * scale;
        }
    }
    let note = if dims_used < dims {
        Some(format!(
            "only {dims_used} of {dims} requested dimensions carry positive spectrum; the rest are zero"
        ))
    } else {
        None
    };

    let mut stress = raw_stress(dv, &coordinates);
    if refine {
        (coordinates, stress) = majorize(dv, coordinates, stress);
    }

    Ok(MdsEmbedding {
        tickers: d.tickers().to_vec(),
        coordinates,
        stress,
        eigen_spectrum: eig.values,
        dims_used,
        negative_mass,
        note,
    })
}

fn raw_stress(d: &Array2<f64>, x: &Array2<f64>) -> f64 {
    let n = d.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let e = d[[i, j]] - configured_distance(x, i, j);
            s += e * e;
        }
    }
    s
}

fn configured_distance(x: &Array2<f64>, i: usize, j: usize) -> f64 {
    (0..x.ncols())
        .map(|t| {
            let diff = x[[i, t]] - x[[j, t]];
            diff * diff
        })
        .sum::<f64>()
        .sqrt()
}

/// Iterated Guttman transform X ← (1/n) B(X) X. Majorization never
/// increases the stress, so the loop stops on stalled improvement.
fn majorize(d: &Array2<f64>, mut x: Array2<f64>, mut stress: f64) -> (Array2<f64>, f64) {
    let n = d.nrows();
    let k = x.ncols();
    for _ in 0..SMACOF_MAX_ITERATIONS {
        if stress <= 1e-30 {
            break;
        }
        let mut bx = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let dist = configured_distance(&x, i, j);
                // Coincident points contribute nothing to the transform.
                bx[[i, j]] = if dist > 1e-15 { -d[[i, j]] / dist } else { 0.0 };
            }
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| bx[[i, j]]).sum();
            bx[[i, i]] = -off;
        }
        let mut next = Array2::zeros((n, k));
        for i in 0..n {
            for t in 0..k {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += bx[[i, j]] * x[[j, t]];
                }
                next[[i, t]] = acc / n as f64;
            }
        }
        let next_stress = raw_stress(d, &next);
        let rel = (stress - next_stress) / stress.max(f64::MIN_POSITIVE);
        x = next;
        stress = next_stress;
        if rel < SMACOF_RELATIVE_TOLERANCE {
            break;
        }
    }
    // The transform drifts the centroid; put it back at the origin.
    for t in 0..k {
        let mean = x.column(t).sum() / n as f64;
        for i in 0..n {
            x[[i, t]] -= mean;
        }
    }
    (x, stress)
}

fn axis_name(t: usize) -> String {
    match t {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        _ => format!("c{}", t + 1),
    }
}

const PALETTE: [&str; 13] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a",
];

impl MdsEmbedding {
    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn coordinates(&self) -> &Array2<f64> {
        &self.coordinates
    }

    pub fn n(&self) -> usize {
        self.tickers.len()
    }

    /// CSV of the configuration, one row per series.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let dims = self.coordinates.ncols();
        let header: Vec<String> = (0..dims).map(axis_name).collect();
        writeln!(w, "ticker,{}", header.join(","))?;
        for (i, ticker) in self.tickers.iter().enumerate() {
            let row: Vec<String> = (0..dims).map(|t| sig15(self.coordinates[[i, t]])).collect();
            writeln!(w, "{ticker},{}", row.join(","))?;
        }
        Ok(())
    }

    /// Standalone SVG scatter of the first two coordinates. `groups`
    /// assigns palette colors; everything is one color without it. The
    /// output is a pure function of the embedding.
    pub fn write_svg<W: Write>(&self, mut w: W, groups: Option<&[usize]>) -> io::Result<()> {
        const WIDTH: f64 = 640.0;
        const HEIGHT: f64 = 480.0;
        const MARGIN: f64 = 48.0;

        let n = self.n();
        let xs: Vec<f64> = (0..n).map(|i| self.coordinates[[i, 0]]).collect();
        let ys: Vec<f64> = (0..n)
            .map(|i| if self.coordinates.ncols() > 1 { self.coordinates[[i, 1]] } else { 0.0 })
            .collect();
        let (x_lo, x_hi) = bounds(&xs);
        let (y_lo, y_hi) = bounds(&ys);
        // One scale for both axes keeps the geometry undistorted.
        let span_x = (x_hi - x_lo).max(1e-12);
        let span_y = (y_hi - y_lo).max(1e-12);
        let scale = ((WIDTH - 2.0 * MARGIN) / span_x).min((HEIGHT - 2.0 * MARGIN) / span_y);
        let cx = (x_lo + x_hi) / 2.0;
        let cy = (y_lo + y_hi) / 2.0;

        writeln!(
            w,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
        )?;
        writeln!(w, "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>")?;
        for i in 0..n {
            let px = WIDTH / 2.0 + (xs[i] - cx) * scale;
            // SVG y grows downward.
            let py = HEIGHT / 2.0 - (ys[i] - cy) * scale;
            let color = PALETTE[groups.map_or(0, |g| g[i]) % PALETTE.len()];
            writeln!(
                w,
                "  <circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"5\" fill=\"{color}\" stroke=\"#333333\" stroke-width=\"1\"/>"
            )?;
            writeln!(
                w,
                "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222222\">{}</text>",
                px + 7.0,
                py + 4.0,
                xml_escape(&self.tickers[i])
            )?;
        }
        writeln!(w, "</svg>")
    }

    /// Spectrum and quality numbers for the diagnostics file.
    pub fn diagnostics_json(&self) -> serde_json::Value {
        serde_json::json!({
            "stress": self.stress,
            "eigen_spectrum": self.eigen_spectrum,
            "dims_used": self.dims_used,
            "negative_mass": self.negative_mass,
            "note": self.note,
        })
    }
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    (lo, hi)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
