//! `mesonet synth`: seeded factor-model price panels, to stdout for
//! piping or into a directory with a run record.

use crate::analysis::render;
use crate::config::FileConfig;
use crate::inputs::OutDir;
use crate::meta::{write_run_meta, RunMeta};
use crate::{CliError, SynthArgs};
use mesonet_core::synth::{self, FactorModelSpec, SectorSpec};
use serde_json::json;
use std::io::Write;

const DEFAULT_LOADING: f64 = 0.8;

/// Accepts "KxS" (K sectors of S stocks at the default loading) or an
/// explicit "size:loading,size:loading,..." list (":loading" optional).
fn parse_sectors(raw: &str) -> Result<Vec<SectorSpec>, CliError> {
    let bad = |detail: &str| CliError::Config(format!("sectors {raw:?}: {detail}"));
    if let Some((k, s)) = raw.split_once('x') {
        let k: usize = k.parse().map_err(|_| bad("sector count must be an integer"))?;
        let size: usize = s.parse().map_err(|_| bad("sector size must be an integer"))?;
        if k == 0 || size == 0 {
            return Err(bad("sector count and size must be positive"));
        }
        return Ok(vec![SectorSpec { size, loading: DEFAULT_LOADING }; k]);
    }
    raw.split(',')
        .map(|part| {
            let (size, loading) = match part.split_once(':') {
                Some((size, loading)) => (
                    size,
                    loading.parse().map_err(|_| bad("loading must be a number"))?,
                ),
                None => (part, DEFAULT_LOADING),
            };
            let size: usize = size.parse().map_err(|_| bad("sector size must be an integer"))?;
            if size == 0 {
                return Err(bad("sector sizes must be positive"));
            }
            Ok(SectorSpec { size, loading })
        })
        .collect()
}

pub fn synth(args: SynthArgs) -> Result<(), CliError> {
    let cfg = FileConfig::load(args.config.as_deref())?;
    let seed = args.seed.or(cfg.seed).unwrap_or(42);
    let n_days = args.n_days.or(cfg.n_days).unwrap_or(500);
    let sigma = args.sigma.or(cfg.sigma).unwrap_or(0.5);
    let beta_min = args.beta_min.or(cfg.beta_min).unwrap_or(0.8);
    let beta_max = args.beta_max.or(cfg.beta_max).unwrap_or(1.2);
    let sectors_label = args.sectors.clone().or_else(|| cfg.sectors.clone());
    let sectors = match &sectors_label {
        Some(raw) => parse_sectors(raw)?,
        None => vec![],
    };
    let sector_total: usize = sectors.iter().map(|s| s.size).sum();
    let n_stocks = args
        .n_stocks
        .or(cfg.n_stocks)
        .unwrap_or(if sectors.is_empty() { 50 } else { sector_total });
    let start_price = args.start_price.or(cfg.start_price).unwrap_or(100.0);

    let spec = FactorModelSpec {
        n_stocks,
        n_days,
        market_beta: (beta_min, beta_max),
        sectors,
        idiosyncratic_sigma: sigma,
        seed,
    };
    let market = synth::generate(&spec)?;
    let csv = render(|b| market.write_price_csv(b, start_price));

    let out_dir = args.out.clone().or_else(|| cfg.out.clone());
    let Some(out_dir) = out_dir else {
        return std::io::stdout()
            .write_all(&csv)
            .map_err(|e| CliError::io("stdout", &e));
    };
    let mut out = OutDir::create(&out_dir)?;
    out.write("panel.csv", &csv)?;
    let parameters = json!({
        "seed": seed,
        "n-stocks": n_stocks,
        "n-days": n_days,
        "sigma": sigma,
        "beta-min": beta_min,
        "beta-max": beta_max,
        "sectors": sectors_label,
        "start-price": start_price,
    });
    write_run_meta(
        &mut out,
        &RunMeta {
            command: "synth",
            parameters,
            inputs: vec![],
            notes: vec![synth::RNG_DESCRIPTION.to_string()],
        },
    )
}
