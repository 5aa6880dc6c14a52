//! JSON config file and its merge with command-line flags.
//!
//! Every long flag has a kebab-case key here; a flag given on the
//! command line always wins over the file. Unknown keys are rejected so
//! a typo cannot silently fall back to a default.

use crate::CliError;
use chrono::NaiveDate;
use mesonet_core::panel::{Alignment, NormalizeMode};
use mesonet_core::netgeo::MstAlgorithm;
use mesonet_core::recurrence::EpsMode;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub input: Option<Vec<String>>,
    pub out: Option<String>,
    pub alignment: Option<String>,
    pub window_start: Option<String>,
    pub window_days: Option<usize>,
    pub ticker: Option<String>,
    pub normalize: Option<String>,
    pub m: Option<usize>,
    pub delay: Option<usize>,
    pub eps: Option<f64>,
    pub eps_mode: Option<String>,
    pub theiler: Option<usize>,
    pub l_min: Option<usize>,
    pub v_min: Option<usize>,
    pub bins: Option<usize>,
    pub n_group: Option<usize>,
    pub market: Option<String>,
    pub full_tensor: Option<bool>,
    pub dims: Option<usize>,
    pub refine: Option<bool>,
    pub groups: Option<String>,
    pub algorithm: Option<String>,
    pub clusters: Option<usize>,
    pub seed: Option<u64>,
    pub n_stocks: Option<usize>,
    pub n_days: Option<usize>,
    pub sigma: Option<f64>,
    pub beta_min: Option<f64>,
    pub beta_max: Option<f64>,
    pub sectors: Option<String>,
    pub start_price: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

pub fn parse_date(field: &str, value: &str) -> Result<NaiveDate, CliError> {
    NaiveDate::parse_from_str(value, "%Y-%m-%d")
        .map_err(|_| CliError::Config(format!("{field} must be YYYY-MM-DD, got {value:?}")))
}

pub fn parse_alignment(value: &str) -> Result<Alignment, CliError> {
    match value {
        "intersect" => Ok(Alignment::Intersect),
        "forward-fill" => Ok(Alignment::ForwardFill),
        other => Err(CliError::Config(format!(
            "alignment must be intersect or forward-fill, got {other:?}"
        ))),
    }
}

/// `None` means embed raw price levels.
pub fn parse_normalize(value: &str) -> Result<Option<NormalizeMode>, CliError> {
    match value {
        "max" => Ok(Some(NormalizeMode::MaxScale)),
        "range" => Ok(Some(NormalizeMode::Range)),
        "none" => Ok(None),
        other => Err(CliError::Config(format!(
            "normalize must be max, range or none, got {other:?}"
        ))),
    }
}

pub fn parse_eps_mode(value: &str) -> Result<EpsMode, CliError> {
    match value {
        "relative" => Ok(EpsMode::Relative),
        "absolute" => Ok(EpsMode::Absolute),
        other => Err(CliError::Config(format!(
            "eps-mode must be relative or absolute, got {other:?}"
        ))),
    }
}

pub fn parse_algorithm(value: &str) -> Result<MstAlgorithm, CliError> {
    match value {
        "kruskal" => Ok(MstAlgorithm::Kruskal),
        "prim" => Ok(MstAlgorithm::Prim),
        other => Err(CliError::Config(format!(
            "algorithm must be kruskal or prim, got {other:?}"
        ))),
    }
}

pub fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("missing required parameter --{flag}")))
}
