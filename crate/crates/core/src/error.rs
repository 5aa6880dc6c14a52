//! Crate-wide error type.

use chrono::NaiveDate;
use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input source could not be read.
    Io { path: String, detail: String },
    /// A CSV header, date or number could not be interpreted.
    Parse { origin: String, line: u64, detail: String },
    /// An input contained no data rows.
    EmptyInput { origin: String },
    /// Log returns require strictly positive prices.
    NonPositivePrice { ticker: String, date: NaiveDate, value: f64 },
    /// Dates inside one series must be strictly increasing.
    NonMonotonicDates { ticker: String, date: NaiveDate },
    /// The same ticker appeared twice in the loaded inputs.
    DuplicateTicker { ticker: String },
    UnknownTicker { ticker: String },
    /// Too few observations (or series) for the requested operation.
    InsufficientData { detail: String },
    /// A window start or length falls outside the panel.
    WindowOutOfRange { detail: String },
    /// Correlations are undefined for a constant series.
    ZeroVariance { ticker: String },
    /// A conditioning correlation sits too close to ±1.
    DegenerateConditioning { detail: String },
    /// A computed value left its mathematical range by more than the
    /// rounding tolerance, which indicates inconsistent inputs.
    OutOfRange { what: String, value: f64 },
    /// An iterative solver hit its iteration cap.
    NoConvergence { what: String, residual: f64, iterations: usize },
    InvalidParameter { detail: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io { path, detail } => write!(f, "cannot read {path}: {detail}"),
            Error::Parse { origin, line, detail } => {
                write!(f, "{origin}, line {line}: {detail}")
            }
            Error::EmptyInput { origin } => write!(f, "{origin} contains no data rows"),
            Error::NonPositivePrice { ticker, date, value } => {
                write!(f, "{ticker} has non-positive price {value} on {date}")
            }
            Error::NonMonotonicDates { ticker, date } => {
                write!(f, "{ticker} dates are not strictly increasing at {date}")
            }
            Error::DuplicateTicker { ticker } => {
                write!(f, "ticker {ticker} appears more than once in the inputs")
            }
            Error::UnknownTicker { ticker } => write!(f, "no series named {ticker}"),
            Error::InsufficientData { detail } => write!(f, "{detail}"),
            Error::WindowOutOfRange { detail } => write!(f, "{detail}"),
            Error::ZeroVariance { ticker } => {
                write!(f, "{ticker} has zero variance over the window")
            }
            Error::DegenerateConditioning { detail } => write!(f, "{detail}"),
            Error::OutOfRange { what, value } => {
                write!(f, "{what} = {value} is outside its valid range")
            }
            Error::NoConvergence { what, residual, iterations } => {
                write!(f, "{what} did not converge after {iterations} iterations (residual {residual:e})")
            }
            Error::InvalidParameter { detail } => write!(f, "{detail}"),
        }
    }
}

impl std::error::Error for Error {}
