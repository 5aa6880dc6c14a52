//! Partial correlations conditioned on the market and the residual
//! influence of single stocks.
//!
//! Conditioning on one variable a follows
//! ρ(x,y|a) = (C_xy − C_xa C_ya) / √((1−C_xa²)(1−C_ya²)),
//! applied once with a = M for the market-adjusted matrix and once more,
//! inside that matrix, to condition on a further stock z. The influence
//! of z on the pair is d(x,y|z) = ρ(x,y|M) − ρ(x,y|M,z); averaging over
//! the free partner y gives the influence d(x|z) of z on x.

use crate::error::{Error, Result};
use crate::hist::Histogram;
use crate::spectral::CorrelationMatrix;
use ndarray::Array2;
use rayon::prelude::*;
use std::io::{self, Write};

/// One conditioning step. Degenerate when either conditioning
/// correlation is ±1; results beyond [−1, 1] by more than 1e−12 are
/// rejected, closer overshoots are clamped.
fn conditioned(c_xy: f64, c_xa: f64, c_ya: f64) -> Result<f64> {
    let dx = 1.0 - c_xa * c_xa;
    let dy = 1.0 - c_ya * c_ya;
    if dx < 1e-12 || dy < 1e-12 {
        return Err(Error::DegenerateConditioning {
            detail: format!(
                "conditioning correlation too close to ±1 (1−c² = {:.3e} and {:.3e})",
                dx, dy
            ),
        });
    }
    let rho = (c_xy - c_xa * c_ya) / (dx * dy).sqrt();
    if rho.abs() > 1.0 + 1e-12 {
        return Err(Error::OutOfRange { what: "partial correlation".into(), value: rho });
    }
    Ok(rho.clamp(-1.0, 1.0))
}

/// ρ(x,y|M) from raw pairwise correlations.
pub fn partial_given_market(c_xy: f64, c_xm: f64, c_ym: f64) -> Result<f64> {
    conditioned(c_xy, c_xm, c_ym)
}

/// ρ(x,y|M,z) from market-adjusted correlations.
pub fn partial_given_market_and_z(p_xy: f64, p_xz: f64, p_yz: f64) -> Result<f64> {
    conditioned(p_xy, p_xz, p_yz)
}

/// Market-adjusted correlation structure of the non-market series.
#[derive(Debug, Clone)]
pub struct PartialCorrelationSet {
    stock_tickers: Vec<String>,
    market_ticker: String,
    /// Raw stock-stock correlations.
    base: Array2<f64>,
    /// ρ(x,y|M), unit diagonal.
    given_market: Array2<f64>,
    /// d(x|z): rows are the affected stock x, columns the conditioning
    /// stock z. Diagonal is NaN (a stock has no influence on itself).
    avg_influence: Array2<f64>,
}

/// Conditions every stock pair on `market` and tabulates single-stock
/// influences. Needs the market plus at least 3 stocks so that each
/// influence average has a free partner left.
pub fn conditioned_on_market(c: &CorrelationMatrix, market: &str) -> Result<PartialCorrelationSet> {
    let m = c
        .tickers()
        .iter()
        .position(|t| t == market)
        .ok_or_else(|| Error::UnknownTicker { ticker: market.to_string() })?;
    let stocks: Vec<usize> = (0..c.n()).filter(|&i| i != m).collect();
    let n = stocks.len();
    if n < 3 {
        return Err(Error::InsufficientData {
            detail: format!("influence analysis needs at least 3 non-market series, got {n}"),
        });
    }
    let v = c.values();

    let mut base = Array2::zeros((n, n));
    let mut given_market = Array2::zeros((n, n));
    for x in 0..n {
        base[[x, x]] = 1.0;
        given_market[[x, x]] = 1.0;
        for y in x + 1..n {
            let raw = v[[stocks[x], stocks[y]]];
            base[[x, y]] = raw;
            base[[y, x]] = raw;
            let p = conditioned(raw, v[[stocks[x], m]], v[[stocks[y], m]])?;
            given_market[[x, y]] = p;
            given_market[[y, x]] = p;
        }
    }

    // d(x|z) rows in parallel; errors are surfaced in row order so runs
    // stay deterministic.
    let rows: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut row = vec![f64::NAN; n];
            for z in 0..n {
                if z == x {
                    continue;
                }
                let mut sum = 0.0;
                let mut terms = 0usize;
                for y in 0..n {
                    if y == x || y == z {
                        continue;
                    }
                    let p = conditioned(
                        given_market[[x, y]],
                        given_market[[x, z]],
                        given_market[[y, z]],
                    )?;
                    sum += given_market[[x, y]] - p;
                    terms += 1;
                }
                row[z] = sum / terms as f64;
            }
            Ok(row)
        })
        .collect();
    let mut avg_influence = Array2::from_elem((n, n), f64::NAN);
    for (x, row) in rows.into_iter().enumerate() {
        for (z, val) in row?.into_iter().enumerate() {
            avg_influence[[x, z]] = val;
        }
    }

    Ok(PartialCorrelationSet {
        stock_tickers: stocks.iter().map(|&i| c.tickers()[i].clone()).collect(),
        market_ticker: market.to_string(),
        base,
        given_market,
        avg_influence,
    })
}

impl PartialCorrelationSet {
    pub fn stock_tickers(&self) -> &[String] {
        &self.stock_tickers
    }

    pub fn market_ticker(&self) -> &str {
        &self.market_ticker
    }

    pub fn n(&self) -> usize {
        self.stock_tickers.len()
    }

    pub fn base(&self) -> &Array2<f64> {
        &self.base
    }

    pub fn given_market(&self) -> &Array2<f64> {
        &self.given_market
    }

    pub fn avg_influence(&self) -> &Array2<f64> {
        &self.avg_influence
    }

    pub fn stock_index(&self, ticker: &str) -> Result<usize> {
        self.stock_tickers
            .iter()
            .position(|t| t == ticker)
            .ok_or_else(|| Error::UnknownTicker { ticker: ticker.to_string() })
    }

    /// ρ(x,y|M,z) by stock index; x, y, z must be distinct.
    pub fn partial_given_both(&self, x: usize, y: usize, z: usize) -> Result<f64> {
        conditioned(
            self.given_market[[x, y]],
            self.given_market[[x, z]],
            self.given_market[[y, z]],
        )
    }

    /// d(x,y|z) = ρ(x,y|M) − ρ(x,y|M,z).
    pub fn influence(&self, x: usize, y: usize, z: usize) -> Result<f64> {
        Ok(self.given_market[[x, y]] - self.partial_given_both(x, y, z)?)
    }

    /// d(x|z) for every x ≠ z, in ticker order with x = z skipped.
    pub fn average_influence(&self, z: usize) -> Vec<f64> {
        (0..self.n()).filter(|&x| x != z).map(|x| self.avg_influence[[x, z]]).collect()
    }

    /// All off-diagonal d(x|z) values in row-major order.
    pub fn influence_values(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * (n - 1));
        for x in 0..n {
            for z in 0..n {
                if x != z {
                    out.push(self.avg_influence[[x, z]]);
                }
            }
        }
        out
    }

    /// Histogram of d(x|z) over the observed range.
    pub fn influence_distribution(&self, bins: usize) -> Result<Histogram> {
        Histogram::from_values(&self.influence_values(), bins, None)
    }

    /// Per-pair mean and max of ρ(x,y|M,z) over the conditioning stock
    /// z ∉ {x, y}. Diagonals are fixed at 1.
    pub fn pair_partial_over_z(&self) -> Result<(Array2<f64>, Array2<f64>)> {
        let n = self.n();
        let mut mean = Array2::from_elem((n, n), 1.0);
        let mut max = Array2::from_elem((n, n), 1.0);
        for x in 0..n {
            for y in x + 1..n {
                let mut sum = 0.0;
                let mut best = f64::NEG_INFINITY;
                let mut terms = 0usize;
                for z in 0..n {
                    if z == x || z == y {
                        continue;
                    }
                    let p = self.partial_given_both(x, y, z)?;
                    sum += p;
                    best = best.max(p);
                    terms += 1;
                }
                mean[[x, y]] = sum / terms as f64;
                mean[[y, x]] = mean[[x, y]];
                max[[x, y]] = best;
                max[[y, x]] = best;
            }
        }
        Ok((mean, max))
    }

    /// CSV of every d(x,y|z) with x < y and z ∉ {x, y}.
    pub fn write_full_tensor<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,y,z,influence")?;
        let n = self.n();
        for x in 0..n {
            for y in x + 1..n {
                for z in 0..n {
                    if z == x || z == y {
                        continue;
                    }
                    // The set was built without errors, so every triple
                    // conditions cleanly.
                    let d = self.influence(x, y, z).expect("validated at construction");
                    writeln!(
                        w,
                        "{},{},{},{}",
                        self.stock_tickers[x],
                        self.stock_tickers[y],
                        self.stock_tickers[z],
                        crate::textio::sig15(d)
                    )?;
                }
            }
        }
        Ok(())
    }
}
