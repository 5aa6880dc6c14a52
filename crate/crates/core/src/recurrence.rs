//! Phase-space embedding, recurrence matrices and their line-based
//! measures.
//!
//! A scalar series x(1..N) is delay-embedded as
//! y(i) = [x(i), x(i+δ), ..., x(i+(m−1)δ)], giving n = N − (m−1)δ points.
//! Two points recur when their Euclidean distance is at most ε, which
//! yields a symmetric boolean matrix with a unit main diagonal (the line
//! of identity). The quantification measures condense the distribution of
//! diagonal and vertical line segments in that matrix.
//!
//! Diagonal statistics skip the line of identity and, when a Theiler
//! window is set, every diagonal with |i−j| ≤ theiler; the recurrence rate
//! and the vertical statistics always use the raw matrix.

use crate::error::{Error, Result};
use ndarray::Array2;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::{self, Write};

/// How the threshold ε is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsMode {
    /// ε is a fraction of the maximal phase-space diameter.
    Relative,
    /// ε is a distance in the units of the series.
    Absolute,
}

/// Embedding parameters bundled with the resolved absolute threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingConfig {
    pub dimension: usize,
    pub delay: usize,
    /// Absolute threshold actually applied.
    pub epsilon: f64,
    /// Diagonals with |i−j| ≤ theiler are dropped from diagonal statistics.
    pub theiler: usize,
}

/// Delay embedding. Needs N > (m−1)δ with m, δ ≥ 1.
pub fn embed(series: &[f64], dimension: usize, delay: usize) -> Result<Vec<Vec<f64>>> {
    if dimension == 0 || delay == 0 {
        return Err(Error::InvalidParameter {
            detail: "embedding dimension and delay must be at least 1".into(),
        });
    }
    let span = (dimension - 1) * delay;
    if series.len() <= span {
        return Err(Error::InsufficientData {
            detail: format!(
                "series of {} points is too short for dimension {dimension} and delay {delay} (needs more than {span})",
                series.len()
            ),
        });
    }
    let n = series.len() - span;
    Ok((0..n)
        .map(|i| (0..dimension).map(|k| series[i + k * delay]).collect())
        .collect())
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// All pairwise distances between embedded points.
pub fn distance_plot(points: &[Vec<f64>]) -> Array2<f64> {
    let n = points.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| distance(&points[i], &points[j])).collect())
        .collect();
    let mut out = Array2::zeros((n, n));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    out
}

/// Largest pairwise distance (the phase-space diameter).
pub fn max_diameter(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            for j in i + 1..n {
                best = best.max(distance(&points[i], &points[j]));
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Converts a requested threshold to an absolute one.
pub fn resolve_epsilon(points: &[Vec<f64>], eps: f64, mode: EpsMode) -> f64 {
    match mode {
        EpsMode::Absolute => eps,
        EpsMode::Relative => eps * max_diameter(points),
    }
}

/// Symmetric boolean recurrence matrix with a unit main diagonal.
#[derive(Debug, Clone)]
pub struct RecurrenceMatrix {
    n: usize,
    bits: Vec<bool>,
    config: EmbeddingConfig,
}

/// R_ij = 1 iff ‖y(i) − y(j)‖ ≤ ε. `config.epsilon` is taken as absolute;
/// use [`resolve_epsilon`] first for relative thresholds.
pub fn recurrence_matrix(points: &[Vec<f64>], config: EmbeddingConfig) -> RecurrenceMatrix {
    let n = points.len();
    let eps = config.epsilon;
    let rows: Vec<Vec<bool>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| i == j || distance(&points[i], &points[j]) <= eps)
                .collect()
        })
        .collect();
    let mut bits = Vec::with_capacity(n * n);
    for row in rows {
        bits.extend(row);
    }
    RecurrenceMatrix { n, bits, config }
}

impl RecurrenceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn config(&self) -> &EmbeddingConfig {
        &self.config
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    pub fn count_points(&self) -> u64 {
        self.bits.iter().map(|&b| b as u64).sum()
    }

    /// Sparse coordinate CSV of the strictly upper triangle (`i,j` header,
    /// 0-based). The unit diagonal is implicit.
    pub fn write_upper_coords<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "i,j")?;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.get(i, j) {
                    writeln!(w, "{i},{j}")?;
                }
            }
        }
        Ok(())
    }

    /// Plain PGM raster, recurrence points black (0) on white (1), matrix
    /// row i as raster row i from the top.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "P2")?;
        writeln!(w, "{} {}", self.n, self.n)?;
        writeln!(w, "1")?;
        for i in 0..self.n {
            let mut line = String::with_capacity(2 * self.n);
            for j in 0..self.n {
                line.push(if self.get(i, j) { '0' } else { '1' });
                if j + 1 < self.n {
                    line.push(' ');
                }
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// The seven classical recurrence measures plus the line histograms they
/// are computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct RqaReport {
    /// Fraction of recurrent cells, diagonal included.
    pub recurrence_rate: f64,
    /// Fraction of counted recurrence points on diagonal lines of length
    /// at least `l_min`.
    pub determinism: f64,
    /// Mean length of those diagonal lines.
    pub mean_diagonal: f64,
    /// Longest diagonal line off the line of identity (0 when no line
    /// reaches `l_min`).
    pub longest_diagonal: usize,
    /// Shannon entropy (natural log) of the diagonal line-length
    /// distribution at or above `l_min`.
    pub diagonal_entropy: f64,
    /// Fraction of recurrence points on vertical lines of length at least
    /// `v_min`.
    pub laminarity: f64,
    /// Mean length of those vertical lines.
    pub trapping_time: f64,
    pub diagonal_lines: BTreeMap<usize, u64>,
    pub vertical_lines: BTreeMap<usize, u64>,
    pub l_min: usize,
    pub v_min: usize,
}

/// Quantifies a recurrence matrix. `l_min` and `v_min` are clamped to at
/// least 1. Measures whose defining line set is empty are reported as 0.
pub fn rqa(rm: &RecurrenceMatrix, l_min: usize, v_min: usize) -> RqaReport {
    let n = rm.n();
    let l_min = l_min.max(1);
    let v_min = v_min.max(1);
    let theiler = rm.config().theiler;

    let total: u64 = rm.count_points();

    // Diagonal lines, both triangles, offsets beyond the Theiler window.
    let mut diagonal_lines: BTreeMap<usize, u64> = BTreeMap::new();
    let mut excluded_band: u64 = n as u64; // line of identity
    for offset in 1..n {
        let len = n - offset;
        if offset <= theiler {
            for start in 0..len {
                excluded_band += 2 * rm.get(start, start + offset) as u64;
            }
            continue;
        }
        let mut run = 0usize;
        for start in 0..len {
            if rm.get(start, start + offset) {
                run += 1;
            } else if run > 0 {
                *diagonal_lines.entry(run).or_insert(0) += 2;
                run = 0;
            }
        }
        if run > 0 {
            // Lines cut by the matrix border count at their visible length.
            *diagonal_lines.entry(run).or_insert(0) += 2;
        }
    }
    let counted = total - excluded_band;

    let mut diag_points = 0u64;
    let mut diag_lines = 0u64;
    for (&len, &cnt) in diagonal_lines.range(l_min..) {
        diag_points += len as u64 * cnt;
        diag_lines += cnt;
    }
    let determinism = if counted > 0 { diag_points as f64 / counted as f64 } else { 0.0 };
    let mean_diagonal = if diag_lines > 0 { diag_points as f64 / diag_lines as f64 } else { 0.0 };
    let longest_diagonal = match diagonal_lines.keys().next_back() {
        Some(&max) if max >= l_min => max,
        _ => 0,
    };
    let diagonal_entropy = if diag_lines > 0 {
        diagonal_lines
            .range(l_min..)
            .map(|(_, &cnt)| {
                let p = cnt as f64 / diag_lines as f64;
                -p * p.ln()
            })
            .sum()
    } else {
        0.0
    };

    // Vertical lines over the raw matrix, line of identity included.
    let mut vertical_lines: BTreeMap<usize, u64> = BTreeMap::new();
    for j in 0..n {
        let mut run = 0usize;
        for i in 0..n {
            if rm.get(i, j) {
                run += 1;
            } else if run > 0 {
                *vertical_lines.entry(run).or_insert(0) += 1;
                run = 0;
            }
        }
        if run > 0 {
            *vertical_lines.entry(run).or_insert(0) += 1;
        }
    }
    let mut vert_points = 0u64;
    let mut vert_lines = 0u64;
    for (&len, &cnt) in vertical_lines.range(v_min..) {
        vert_points += len as u64 * cnt;
        vert_lines += cnt;
    }
    let laminarity = if total > 0 { vert_points as f64 / total as f64 } else { 0.0 };
    let trapping_time = if vert_lines > 0 { vert_points as f64 / vert_lines as f64 } else { 0.0 };

    RqaReport {
        recurrence_rate: total as f64 / (n as f64 * n as f64),
        determinism,
        mean_diagonal,
        longest_diagonal,
        diagonal_entropy,
        laminarity,
        trapping_time,
        diagonal_lines,
        vertical_lines,
        l_min,
        v_min,
    }
}

impl RqaReport {
    /// Flat JSON object with the seven measures and the line-filter
    /// settings, keyed by the conventional short names.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rr": self.recurrence_rate,
            "det": self.determinism,
            "l_mean": self.mean_diagonal,
            "l_max": self.longest_diagonal,
            "entr": self.diagonal_entropy,
            "lam": self.laminarity,
            "tt": self.trapping_time,
            "l_min": self.l_min,
            "v_min": self.v_min,
        })
    }
}
