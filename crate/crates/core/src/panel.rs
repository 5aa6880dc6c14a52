//! Price panel ingestion, date alignment and log-return construction.
//!
//! Input files are CSV with ISO-8601 dates and '.' decimal separators, in
//! one of two layouts:
//!
//! * long: `date,ticker,adj_close`, rows may interleave tickers;
//! * wide: `date,<ticker>,<ticker>,...`, empty cells mark missing days.
//!
//! Prices must be strictly positive and each series' dates strictly
//! increasing. Series order is preserved from the inputs (column order for
//! wide files, first appearance for long ones).

use crate::error::{Error, Result};
use chrono::NaiveDate;
use ndarray::{s, Array2};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

/// How series with unequal trading calendars are reconciled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    /// Keep only dates present in every series.
    Intersect,
    /// Take the union of dates and carry each series' last observed price
    /// forward over its gaps. Dates before a series' first observation
    /// cannot be filled and are dropped from the union.
    ForwardFill,
}

/// Level normalization applied before phase-space embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizeMode {
    /// (P − P_min) / P_max. Values lie in [0, 1 − P_min/P_max].
    MaxScale,
    /// (P − P_min) / (P_max − P_min), the conventional unit-range map.
    /// A constant series maps to all zeros.
    Range,
}

/// One ticker's adjusted-close history.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    ticker: String,
    dates: Vec<NaiveDate>,
    prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(ticker: String, dates: Vec<NaiveDate>, prices: Vec<f64>) -> Result<Self> {
        if dates.is_empty() {
            return Err(Error::EmptyInput { origin: format!("series {ticker}") });
        }
        assert_eq!(dates.len(), prices.len(), "dates and prices must pair up");
        for k in 1..dates.len() {
            if dates[k] <= dates[k - 1] {
                return Err(Error::NonMonotonicDates { ticker, date: dates[k] });
            }
        }
        for (k, &p) in prices.iter().enumerate() {
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::NonPositivePrice { ticker, date: dates[k], value: p });
            }
        }
        Ok(PriceSeries { ticker, dates, prices })
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Rescales the level path for embedding. The minimum maps to exactly 0
    /// in both modes.
    pub fn normalized_levels(&self, mode: NormalizeMode) -> Vec<f64> {
        let min = self.prices.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = self.prices.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        match mode {
            NormalizeMode::MaxScale => self.prices.iter().map(|p| (p - min) / max).collect(),
            NormalizeMode::Range => {
                let span = max - min;
                if span == 0.0 {
                    vec![0.0; self.prices.len()]
                } else {
                    self.prices.iter().map(|p| (p - min) / span).collect()
                }
            }
        }
    }
}

/// Series aligned onto one common date index.
#[derive(Debug, Clone)]
pub struct PricePanel {
    series: Vec<PriceSeries>,
}

impl PricePanel {
    /// Aligns raw series onto a shared calendar. Fails when fewer than two
    /// common dates remain or a ticker repeats.
    pub fn align(series: Vec<PriceSeries>, alignment: Alignment) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::EmptyInput { origin: "panel".into() });
        }
        check_unique_tickers(&series)?;

        let dates = match alignment {
            Alignment::Intersect => {
                let mut counts: BTreeMap<NaiveDate, usize> = BTreeMap::new();
                for s in &series {
                    for &d in &s.dates {
                        *counts.entry(d).or_insert(0) += 1;
                    }
                }
                counts
                    .into_iter()
                    .filter(|&(_, c)| c == series.len())
                    .map(|(d, _)| d)
                    .collect::<Vec<_>>()
            }
            Alignment::ForwardFill => {
                let start = series.iter().map(|s| s.dates[0]).max().unwrap();
                let mut union: HashSet<NaiveDate> = HashSet::new();
                for s in &series {
                    union.extend(s.dates.iter().copied());
                }
                let mut dates: Vec<NaiveDate> = union.into_iter().filter(|&d| d >= start).collect();
                dates.sort_unstable();
                dates
            }
        };
        if dates.len() < 2 {
            return Err(Error::InsufficientData {
                detail: format!("only {} common dates after alignment, need at least 2", dates.len()),
            });
        }

        let aligned = series
            .into_iter()
            .map(|s| {
                let mut prices = Vec::with_capacity(dates.len());
                let mut k = 0;
                let mut last = s.prices[0];
                for &d in &dates {
                    while k < s.dates.len() && s.dates[k] <= d {
                        last = s.prices[k];
                        k += 1;
                    }
                    // Under Intersect every date is observed, so `last` is the
                    // exact price; under ForwardFill it carries the gap.
                    prices.push(last);
                }
                PriceSeries { ticker: s.ticker, dates: dates.clone(), prices }
            })
            .collect();
        Ok(PricePanel { series: aligned })
    }

    pub fn series(&self) -> &[PriceSeries] {
        &self.series
    }

    pub fn common_dates(&self) -> &[NaiveDate] {
        &self.series[0].dates
    }

    pub fn n_series(&self) -> usize {
        self.series.len()
    }

    pub fn len(&self) -> usize {
        self.series[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Log returns of aligned series, rows in panel order, columns in date
/// order. A return is labeled with the later of its two dates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    tickers: Vec<String>,
    dates: Vec<NaiveDate>,
    returns: Array2<f64>,
}

impl ReturnPanel {
    pub fn from_parts(tickers: Vec<String>, dates: Vec<NaiveDate>, returns: Array2<f64>) -> Result<Self> {
        assert_eq!(returns.nrows(), tickers.len(), "one row per ticker");
        assert_eq!(returns.ncols(), dates.len(), "one column per date");
        let mut seen = HashSet::new();
        for t in &tickers {
            if !seen.insert(t.clone()) {
                return Err(Error::DuplicateTicker { ticker: t.clone() });
            }
        }
        if dates.is_empty() {
            return Err(Error::InsufficientData { detail: "return panel has no observations".into() });
        }
        if returns.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidParameter { detail: "returns must be finite".into() });
        }
        Ok(ReturnPanel { tickers, dates, returns })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.returns
    }

    pub fn n_series(&self) -> usize {
        self.tickers.len()
    }

    pub fn n_obs(&self) -> usize {
        self.dates.len()
    }

    pub fn series_index(&self, ticker: &str) -> Result<usize> {
        self.tickers
            .iter()
            .position(|t| t == ticker)
            .ok_or_else(|| Error::UnknownTicker { ticker: ticker.into() })
    }

    /// Contiguous sub-panel of `length` observations starting at `start`,
    /// which must be one of the panel's return dates.
    pub fn window(&self, start: NaiveDate, length: usize) -> Result<ReturnPanel> {
        if length == 0 {
            return Err(Error::InvalidParameter { detail: "window length must be positive".into() });
        }
        let idx = self
            .dates
            .binary_search(&start)
            .map_err(|_| Error::WindowOutOfRange { detail: format!("window start {start} is not a return date of the panel") })?;
        if idx + length > self.dates.len() {
            return Err(Error::WindowOutOfRange {
                detail: format!(
                    "window of {length} observations from {start} exceeds the panel ({} observations remain)",
                    self.dates.len() - idx
                ),
            });
        }
        Ok(ReturnPanel {
            tickers: self.tickers.clone(),
            dates: self.dates[idx..idx + length].to_vec(),
            returns: self.returns.slice(s![.., idx..idx + length]).to_owned(),
        })
    }

    /// The trailing `length` observations.
    pub fn tail(&self, length: usize) -> Result<ReturnPanel> {
        if length == 0 || length > self.n_obs() {
            return Err(Error::WindowOutOfRange {
                detail: format!("window of {length} observations exceeds the panel ({} available)", self.n_obs()),
            });
        }
        self.window(self.dates[self.n_obs() - length], length)
    }

    /// Sub-panel with the given tickers, in the given order.
    pub fn select(&self, tickers: &[String]) -> Result<ReturnPanel> {
        let rows: Vec<usize> = tickers.iter().map(|t| self.series_index(t)).collect::<Result<_>>()?;
        let mut returns = Array2::<f64>::zeros((rows.len(), self.n_obs()));
        for (out, &src) in rows.iter().enumerate() {
            returns.row_mut(out).assign(&self.returns.row(src));
        }
        ReturnPanel::from_parts(tickers.to_vec(), self.dates.clone(), returns)
    }
}

/// r(τ) = ln P(τ) − ln P(τ−1) for every series of an aligned panel.
pub fn log_returns(panel: &PricePanel) -> ReturnPanel {
    let t = panel.len();
    let n = panel.n_series();
    let mut returns = Array2::<f64>::zeros((n, t - 1));
    for (i, s) in panel.series().iter().enumerate() {
        for k in 1..t {
            returns[[i, k - 1]] = (s.prices[k]).ln() - (s.prices[k - 1]).ln();
        }
    }
    ReturnPanel {
        tickers: panel.series().iter().map(|s| s.ticker.clone()).collect(),
        dates: panel.common_dates()[1..].to_vec(),
        returns,
    }
}

/// Intersection alignment in return space: each series is differenced on
/// its own calendar first, then return dates missing from any ticker are
/// dropped. A series' return over a private gap therefore stays a one-day
/// return instead of being stretched across the gap.
pub fn returns_intersect(series: &[PriceSeries]) -> Result<ReturnPanel> {
    if series.is_empty() {
        return Err(Error::EmptyInput { origin: "panel".into() });
    }
    check_unique_tickers(series)?;

    let mut counts: BTreeMap<NaiveDate, usize> = BTreeMap::new();
    for s in series {
        for &d in &s.dates[1..] {
            *counts.entry(d).or_insert(0) += 1;
        }
    }
    let dates: Vec<NaiveDate> = counts
        .into_iter()
        .filter(|&(_, c)| c == series.len())
        .map(|(d, _)| d)
        .collect();
    if dates.is_empty() {
        return Err(Error::InsufficientData {
            detail: "no common return dates across the series".into(),
        });
    }

    let mut returns = Array2::<f64>::zeros((series.len(), dates.len()));
    for (i, s) in series.iter().enumerate() {
        let mut by_date: HashMap<NaiveDate, f64> = HashMap::with_capacity(s.len() - 1);
        for k in 1..s.len() {
            by_date.insert(s.dates[k], s.prices[k].ln() - s.prices[k - 1].ln());
        }
        for (j, d) in dates.iter().enumerate() {
            returns[[i, j]] = by_date[d];
        }
    }
    Ok(ReturnPanel {
        tickers: series.iter().map(|s| s.ticker.clone()).collect(),
        dates,
        returns,
    })
}

/// Parses one CSV source (long or wide layout, detected from the header).
/// `origin` names the source in errors.
pub fn read_price_series<R: Read>(reader: R, origin: &str) -> Result<Vec<PriceSeries>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(origin, &e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    if headers == ["date", "ticker", "adj_close"] {
        read_long(rdr, origin)
    } else if headers.first().map(String::as_str) == Some("date") && headers.len() >= 2 {
        read_wide(rdr, origin, &headers[1..])
    } else {
        Err(Error::Parse {
            origin: origin.into(),
            line: 1,
            detail: format!(
                "unrecognized header '{}': expected 'date,ticker,adj_close' or 'date,<ticker>,...'",
                headers.join(",")
            ),
        })
    }
}

fn read_long<R: Read>(mut rdr: csv::Reader<R>, origin: &str) -> Result<Vec<PriceSeries>> {
    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<(NaiveDate, f64)>> = HashMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(origin, &e))?;
        let line = record.position().map_or(0, |p| p.line());
        let date = parse_date(record[0].trim(), origin, line)?;
        let ticker = record[1].trim().to_string();
        if ticker.is_empty() {
            return Err(Error::Parse { origin: origin.into(), line, detail: "empty ticker".into() });
        }
        let price = parse_price(record[2].trim(), origin, line)?;
        if !rows.contains_key(&ticker) {
            order.push(ticker.clone());
        }
        rows.entry(ticker).or_default().push((date, price));
    }
    if order.is_empty() {
        return Err(Error::EmptyInput { origin: origin.into() });
    }
    order
        .into_iter()
        .map(|ticker| {
            let pairs = rows.remove(&ticker).unwrap();
            let (dates, prices) = pairs.into_iter().unzip();
            PriceSeries::new(ticker, dates, prices)
        })
        .collect()
}

fn read_wide<R: Read>(mut rdr: csv::Reader<R>, origin: &str, tickers: &[String]) -> Result<Vec<PriceSeries>> {
    for t in tickers {
        if t.is_empty() {
            return Err(Error::Parse { origin: origin.into(), line: 1, detail: "empty ticker column".into() });
        }
    }
    let mut columns: Vec<Vec<(NaiveDate, f64)>> = vec![Vec::new(); tickers.len()];
    let mut any_row = false;
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(origin, &e))?;
        let line = record.position().map_or(0, |p| p.line());
        let date = parse_date(record[0].trim(), origin, line)?;
        any_row = true;
        for (c, cell) in record.iter().skip(1).enumerate() {
            let cell = cell.trim();
            if cell.is_empty() {
                continue;
            }
            columns[c].push((date, parse_price(cell, origin, line)?));
        }
    }
    if !any_row {
        return Err(Error::EmptyInput { origin: origin.into() });
    }
    tickers
        .iter()
        .zip(columns)
        .map(|(ticker, pairs)| {
            let (dates, prices) = pairs.into_iter().unzip();
            PriceSeries::new(ticker.clone(), dates, prices)
        })
        .collect()
}

/// Reads every file and concatenates their series in input order.
pub fn load_series<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<PriceSeries>> {
    let mut all = Vec::new();
    for p in paths {
        let path = p.as_ref();
        let origin = path.display().to_string();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Io { path: origin.clone(), detail: e.to_string() })?;
        all.extend(read_price_series(std::io::BufReader::new(file), &origin)?);
    }
    Ok(all)
}

/// Loads and aligns price files into a panel.
pub fn load_panel<P: AsRef<Path>>(paths: &[P], alignment: Alignment) -> Result<PricePanel> {
    PricePanel::align(load_series(paths)?, alignment)
}

/// Loads price files straight to returns. Under `Intersect` the returns
/// are differenced per series and then intersected (see
/// [`returns_intersect`]); under `ForwardFill` prices are aligned first.
pub fn load_returns<P: AsRef<Path>>(paths: &[P], alignment: Alignment) -> Result<ReturnPanel> {
    let series = load_series(paths)?;
    returns_for(series, alignment)
}

/// Same pipeline as [`load_returns`] for already-parsed series.
pub fn returns_for(series: Vec<PriceSeries>, alignment: Alignment) -> Result<ReturnPanel> {
    match alignment {
        Alignment::Intersect => returns_intersect(&series),
        Alignment::ForwardFill => Ok(log_returns(&PricePanel::align(series, alignment)?)),
    }
}

fn check_unique_tickers(series: &[PriceSeries]) -> Result<()> {
    let mut seen = HashSet::new();
    for s in series {
        if !seen.insert(s.ticker.clone()) {
            return Err(Error::DuplicateTicker { ticker: s.ticker.clone() });
        }
    }
    Ok(())
}

fn parse_date(text: &str, origin: &str, line: u64) -> Result<NaiveDate> {
    NaiveDate::from_str(text).map_err(|_| Error::Parse {
        origin: origin.into(),
        line,
        detail: format!("'{text}' is not an ISO-8601 date"),
    })
}

fn parse_price(text: &str, origin: &str, line: u64) -> Result<f64> {
    text.parse::<f64>().map_err(|_| Error::Parse {
        origin: origin.into(),
        line,
        detail: format!("'{text}' is not a number"),
    })
}

fn csv_error(origin: &str, e: &csv::Error) -> Error {
    Error::Parse {
        origin: origin.into(),
        line: e.position().map_or(0, |p| p.line()),
        detail: e.to_string(),
    }
}
