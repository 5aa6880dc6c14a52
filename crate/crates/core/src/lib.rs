//! Co-movement analysis for financial index panels.
//!
//! The crate covers four stages that are usually chained:
//!
//! 1. [`panel`]: CSV ingestion of adjusted-close series, date alignment and
//!    log-return construction.
//! 2. [`recurrence`]: phase-space embedding of a single series, recurrence
//!    matrices and their line-based measures (RR, DET, LAM, ...).
//! 3. [`spectral`] and [`partialcorr`]: equal-time correlation matrices,
//!    their eigenmode split against the Marchenko-Pastur baseline, and
//!    market-controlled partial correlations with influence averages.
//! 4. [`netgeo`]: correlation distances mapped to low-dimensional geometry
//!    via classical MDS, Ward dendrograms and minimum spanning trees.
//!
//! [`synth`] generates seeded factor-model panels so every stage can be
//! exercised end to end without proprietary market data.

pub mod error;
pub mod hist;
mod linalg;
pub mod netgeo;
pub mod panel;
pub mod partialcorr;
pub mod recurrence;
pub mod spectral;
pub mod synth;
mod textio;

pub use chrono::NaiveDate;
pub use error::{Error, Result};
pub use textio::{sig15, write_labeled_matrix};
