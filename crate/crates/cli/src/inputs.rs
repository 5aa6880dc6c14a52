//! Input loading (files or stdin) with content digests, window
//! application, and the output directory bookkeeping behind
//! `run_meta.json` and `manifest.csv`.

use crate::config::{self, FileConfig};
use crate::{CliError, CommonArgs};
use chrono::NaiveDate;
use mesonet_core::panel::{returns_for, read_price_series, PriceSeries, ReturnPanel};
use mesonet_core::Error;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Read;
use std::path::PathBuf;

pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub struct Loaded {
    pub series: Vec<PriceSeries>,
    pub digests: Vec<InputDigest>,
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Input paths after the flag/config merge; stdin when neither side
/// names a file.
pub fn effective_inputs(flag: &[String], file: Option<&Vec<String>>) -> Vec<String> {
    if !flag.is_empty() {
        flag.to_vec()
    } else {
        file.cloned().unwrap_or_else(|| vec!["-".into()])
    }
}

/// Reads a `ticker,label` manifest and assigns each panel ticker a color
/// class. Labels are numbered in first-appearance order; tickers the
/// manifest does not mention share one trailing class.
pub fn group_classes(path: &str, tickers: &[String]) -> Result<(Vec<usize>, InputDigest), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, &e))?;
    let digest = InputDigest { path: path.to_string(), sha256: hex_digest(&bytes) };
    let text = String::from_utf8(bytes).map_err(|_| {
        CliError::Core(Error::Parse {
            origin: path.to_string(),
            line: 1,
            detail: "group manifest is not utf-8 text".into(),
        })
    })?;

    let mut labels: Vec<String> = Vec::new();
    let mut class_of: Vec<(String, usize)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let row = raw.trim();
        if row.is_empty() || (k == 0 && row.to_ascii_lowercase().starts_with("ticker,")) {
            continue;
        }
        // Labels may contain commas, tickers may not.
        let Some((ticker, label)) = row.split_once(',') else {
            return Err(CliError::Core(Error::Parse {
                origin: path.to_string(),
                line: k as u64 + 1,
                detail: format!("expected 'ticker,label', got '{row}'"),
            }));
        };
        let label = label.trim();
        let class = labels.iter().position(|l| l == label).unwrap_or_else(|| {
            labels.push(label.to_string());
            labels.len() - 1
        });
        class_of.push((ticker.trim().to_string(), class));
    }

    let fallback = labels.len();
    let classes = tickers
        .iter()
        .map(|t| class_of.iter().find(|(name, _)| name == t).map_or(fallback, |&(_, c)| c))
        .collect();
    Ok((classes, digest))
}

pub fn load(paths: &[String]) -> Result<Loaded, CliError> {
    let mut series = Vec::new();
    let mut digests = Vec::new();
    for path in paths {
        let (bytes, origin) = if path == "-" {
            let mut buf = Vec::new();
            std::io::stdin()
                .read_to_end(&mut buf)
                .map_err(|e| CliError::io("stdin", &e))?;
            (buf, "stdin".to_string())
        } else {
            (fs::read(path).map_err(|e| CliError::io(path, &e))?, path.clone())
        };
        digests.push(InputDigest { path: path.clone(), sha256: hex_digest(&bytes) });
        series.extend(read_price_series(bytes.as_slice(), &origin)?);
    }
    Ok(Loaded { series, digests })
}

pub fn window_panel(
    panel: ReturnPanel,
    start: Option<NaiveDate>,
    days: Option<usize>,
) -> Result<ReturnPanel, CliError> {
    Ok(match (start, days) {
        (None, None) => panel,
        (None, Some(d)) => panel.tail(d)?,
        (Some(s), Some(d)) => panel.window(s, d)?,
        (Some(s), None) => {
            let remaining = panel.dates().iter().filter(|&&date| date >= s).count();
            if remaining == 0 {
                return Err(Error::WindowOutOfRange {
                    detail: format!("window start {s} is after the last panel date"),
                }
                .into());
            }
            panel.window(s, remaining)?
        }
    })
}

/// Sub-series for level analysis: from the first observation at or after
/// `start`, `days` observations (trailing ones when `start` is absent).
pub fn window_series(
    series: &PriceSeries,
    start: Option<NaiveDate>,
    days: Option<usize>,
) -> Result<PriceSeries, CliError> {
    let len = series.len();
    let from = match start {
        Some(s) => series.dates().iter().position(|&d| d >= s).ok_or_else(|| {
            Error::WindowOutOfRange {
                detail: format!("window start {s} is after the series' last date"),
            }
        })?,
        None => 0,
    };
    let available = len - from;
    let (lo, take) = match days {
        Some(0) => {
            return Err(Error::WindowOutOfRange {
                detail: "window length must be positive".into(),
            }
            .into())
        }
        Some(d) if d > available => {
            return Err(Error::WindowOutOfRange {
                detail: format!("window of {d} observations exceeds the series ({available} available)"),
            }
            .into())
        }
        Some(d) if start.is_none() => (len - d, d),
        Some(d) => (from, d),
        None => (from, available),
    };
    Ok(PriceSeries::new(
        series.ticker().to_string(),
        series.dates()[lo..lo + take].to_vec(),
        series.prices()[lo..lo + take].to_vec(),
    )?)
}

/// Output directory that remembers what was written and its digest.
pub struct OutDir {
    dir: PathBuf,
    written: Vec<(String, String)>,
}

impl OutDir {
    pub fn create(dir: &str) -> Result<OutDir, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, &e))?;
        Ok(OutDir { dir: PathBuf::from(dir), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path.display().to_string(), &e))?;
        self.written.push((name.to_string(), hex_digest(bytes)));
        Ok(())
    }

    /// Names written so far, sorted.
    pub fn outputs(&self) -> Vec<String> {
        let mut names: Vec<String> = self.written.iter().map(|(n, _)| n.clone()).collect();
        names.sort();
        names
    }

    /// file,sha256 rows for everything written so far, sorted by name.
    pub fn manifest_csv(&self) -> String {
        let mut rows = self.written.clone();
        rows.sort();
        let mut text = String::from("file,sha256\n");
        for (name, hash) in rows {
            text.push_str(&name);
            text.push(',');
            text.push_str(&hash);
            text.push('\n');
        }
        text
    }
}

/// Everything the panel-consuming subcommands share: config merge, input
/// loading, alignment, windowing and the output directory.
pub struct PanelRun {
    pub panel: ReturnPanel,
    pub digests: Vec<InputDigest>,
    pub cfg: FileConfig,
    pub out: OutDir,
    /// Parameters every panel command reports: input paths, alignment
    /// and window, already merged to their effective values.
    pub base_parameters: serde_json::Map<String, serde_json::Value>,
}

pub fn panel_prologue(common: &CommonArgs) -> Result<PanelRun, CliError> {
    let cfg = FileConfig::load(common.config.as_deref())?;
    let paths = effective_inputs(&common.input, cfg.input.as_ref());
    let loaded = load(&paths)?;

    let alignment_label = common
        .alignment
        .clone()
        .or_else(|| cfg.alignment.clone())
        .unwrap_or_else(|| "intersect".into());
    let alignment = config::parse_alignment(&alignment_label)?;
    let panel = returns_for(loaded.series, alignment)?;

    let start = common
        .window_start
        .clone()
        .or_else(|| cfg.window_start.clone())
        .map(|s| config::parse_date("window-start", &s))
        .transpose()?;
    let days = common.window_days.or(cfg.window_days);
    let panel = window_panel(panel, start, days)?;

    let out_dir = common.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| ".".into());
    let out = OutDir::create(&out_dir)?;

    let mut base_parameters = serde_json::Map::new();
    base_parameters.insert("input".into(), serde_json::json!(paths));
    base_parameters.insert("alignment".into(), serde_json::json!(alignment_label));
    base_parameters.insert(
        "window-start".into(),
        start.map_or(serde_json::Value::Null, |s| serde_json::json!(s.to_string())),
    );
    base_parameters
        .insert("window-days".into(), days.map_or(serde_json::Value::Null, |d| serde_json::json!(d)));

    Ok(PanelRun { panel, digests: loaded.digests, cfg, out, base_parameters })
}
