//! Metric network geometry on top of a correlation matrix: the
//! ultrametric distance, a low-dimensional map, a Ward dendrogram and a
//! minimum spanning tree.
//!
//! The metric is d = √(2(1−C)), which maps C = 1 to 0, C = 0 to √2 and
//! C = −1 to 2 and satisfies the triangle inequality for any valid
//! correlation matrix.

pub mod mds;
pub mod mst;
pub mod ward;

pub use mds::{mds, MdsEmbedding};
pub use mst::{minimum_spanning_tree, MstAlgorithm, SpanningTree};
pub use ward::{ward_dendrogram, Dendrogram, Merge};

use crate::error::{Error, Result};
use crate::panel::ReturnPanel;
use crate::spectral::CorrelationMatrix;
use crate::textio::write_labeled_matrix;
use chrono::NaiveDate;
use ndarray::Array2;
use std::io::{self, Write};

/// Symmetric distance matrix with zero diagonal.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    tickers: Vec<String>,
    values: Array2<f64>,
}

impl DistanceMatrix {
    /// d = √(2(1−C)). Correlations a rounding error above 1 clamp to
    /// distance 0.
    pub fn from_correlation(c: &CorrelationMatrix) -> DistanceMatrix {
        let n = c.n();
        let mut values = Array2::zeros((n, n));
        for i in 0..n {
            for j in i + 1..n {
                let d = (2.0 * (1.0 - c.values()[[i, j]])).max(0.0).sqrt();
                values[[i, j]] = d;
                values[[j, i]] = d;
            }
        }
        DistanceMatrix { tickers: c.tickers().to_vec(), values }
    }

    /// Wraps an existing matrix. Requires symmetry, non-negative finite
    /// entries and a zero diagonal.
    pub fn from_parts(tickers: Vec<String>, values: Array2<f64>) -> Result<DistanceMatrix> {
        let n = tickers.len();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::InvalidParameter {
                detail: format!(
                    "distance matrix is {}x{} but there are {n} labels",
                    values.nrows(),
                    values.ncols()
                ),
            });
        }
        let mut cleaned = values;
        for i in 0..n {
            if cleaned[[i, i]].abs() > 1e-12 {
                return Err(Error::InvalidParameter {
                    detail: format!("self-distance of {} is {}", tickers[i], cleaned[[i, i]]),
                });
            }
            cleaned[[i, i]] = 0.0;
            for j in 0..n {
                let v = cleaned[[i, j]];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::OutOfRange { what: "distance".into(), value: v });
                }
                if (v - cleaned[[j, i]]).abs() > 1e-12 {
                    return Err(Error::InvalidParameter {
                        detail: format!("distance matrix is not symmetric at ({i},{j})"),
                    });
                }
            }
        }
        Ok(DistanceMatrix { tickers, values: cleaned })
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

    /// Labeled CSV of the full matrix.
    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        write_labeled_matrix(w, &self.tickers, &self.values)
    }
}

/// Knobs for the combined geometry pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeometryOptions {
    /// Target embedding dimension.
    pub dims: usize,
    /// Polish the embedding by iterative stress majorization.
    pub refine: bool,
    pub algorithm: MstAlgorithm,
}

impl Default for GeometryOptions {
    fn default() -> Self {
        GeometryOptions { dims: 2, refine: false, algorithm: MstAlgorithm::Kruskal }
    }
}

/// Everything the geometry stage derives from one return window.
#[derive(Debug, Clone)]
pub struct SectorGeometry {
    pub correlation: CorrelationMatrix,
    pub distance: DistanceMatrix,
    pub embedding: MdsEmbedding,
    pub dendrogram: Dendrogram,
    pub tree: SpanningTree,
}

/// Runs correlation, distance, embedding, dendrogram and spanning tree
/// over `panel`, optionally restricted to `days` observations starting
/// at `start`.
pub fn sector_pipeline(
    panel: &ReturnPanel,
    window: Option<(NaiveDate, usize)>,
    opts: &GeometryOptions,
) -> Result<SectorGeometry> {
    let windowed;
    let panel = match window {
        Some((start, days)) => {
            windowed = panel.window(start, days)?;
            &windowed
        }
        None => panel,
    };
    let correlation = CorrelationMatrix::from_panel(panel)?;
    let distance = DistanceMatrix::from_correlation(&correlation);
    let embedding = mds(&distance, opts.dims, opts.refine)?;
    let dendrogram = ward_dendrogram(&distance)?;
    let tree = minimum_spanning_tree(&distance, opts.algorithm);
    Ok(SectorGeometry { correlation, distance, embedding, dendrogram, tree })
}
