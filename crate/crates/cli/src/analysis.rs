//! Subcommands over a single series or a return panel: rqa, corr, modes
//! and partial.

use crate::config::{self, FileConfig};
use crate::inputs::{self, OutDir};
use crate::jsonnum;
use crate::meta::{write_run_meta, RunMeta};
use crate::{CliError, CorrArgs, ModesArgs, PartialArgs, RqaArgs};
use mesonet_core::partialcorr;
use mesonet_core::recurrence::{self, EmbeddingConfig};
use mesonet_core::spectral::{self, CorrelationMatrix};
use mesonet_core::write_labeled_matrix;
use mesonet_core::Error;
use serde_json::json;

/// Renders one export into memory; the writers only fail on real I/O.
pub fn render(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("in-memory write cannot fail");
    buf
}

pub fn rqa(args: RqaArgs) -> Result<(), CliError> {
    let cfg = FileConfig::load(args.common.config.as_deref())?;
    let paths = inputs::effective_inputs(&args.common.input, cfg.input.as_ref());
    let loaded = inputs::load(&paths)?;

    let ticker = args.ticker.clone().or_else(|| cfg.ticker.clone());
    let series = match &ticker {
        Some(t) => loaded
            .series
            .iter()
            .find(|s| s.ticker() == t)
            .ok_or_else(|| Error::UnknownTicker { ticker: t.clone() })?,
        None if loaded.series.len() == 1 => &loaded.series[0],
        None => {
            return Err(CliError::Config(format!(
                "--ticker is required when {} series are loaded",
                loaded.series.len()
            )))
        }
    };

    let start = args
        .common
        .window_start
        .clone()
        .or_else(|| cfg.window_start.clone())
        .map(|s| config::parse_date("window-start", &s))
        .transpose()?;
    let days = args.common.window_days.or(cfg.window_days);
    let series = inputs::window_series(series, start, days)?;

    let normalize_label =
        args.normalize.clone().or_else(|| cfg.normalize.clone()).unwrap_or_else(|| "max".into());
    let levels = match config::parse_normalize(&normalize_label)? {
        Some(mode) => series.normalized_levels(mode),
        None => series.prices().to_vec(),
    };

    let m = config::require(args.m.or(cfg.m), "m")?;
    let delay = config::require(args.delay.or(cfg.delay), "delay")?;
    let eps_input = config::require(args.eps.or(cfg.eps), "eps")?;
    let eps_mode_label =
        args.eps_mode.clone().or_else(|| cfg.eps_mode.clone()).unwrap_or_else(|| "relative".into());
    let eps_mode = config::parse_eps_mode(&eps_mode_label)?;
    let theiler = args.theiler.or(cfg.theiler).unwrap_or(0);
    let l_min = args.l_min.or(cfg.l_min).unwrap_or(2);
    let v_min = args.v_min.or(cfg.v_min).unwrap_or(2);

    let points = recurrence::embed(&levels, m, delay)?;
    let epsilon = recurrence::resolve_epsilon(&points, eps_input, eps_mode);
    let rm = recurrence::recurrence_matrix(
        &points,
        EmbeddingConfig { dimension: m, delay, epsilon, theiler },
    );
    let report = recurrence::rqa(&rm, l_min, v_min);

    let out_dir =
        args.common.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| ".".into());
    let mut out = OutDir::create(&out_dir)?;
    out.write("recurrence.csv", &render(|b| rm.write_upper_coords(b)))?;
    out.write("recurrence.pgm", &render(|b| rm.write_pgm(b)))?;
    let report_json = json!({
        "series": {
            "ticker": series.ticker(),
            "observations": series.len(),
            "normalize": normalize_label,
        },
        "embedding": {
            "m": m,
            "delay": delay,
            "points": rm.n(),
            "eps-input": eps_input,
            "eps-mode": eps_mode_label,
            "epsilon": epsilon,
            "theiler": theiler,
        },
        "measures": report.summary_json(),
    });
    out.write("rqa_report.json", &jsonnum::to_bytes(&report_json))?;

    let parameters = json!({
        "input": paths,
        "ticker": series.ticker(),
        "window-start": start.map(|s| s.to_string()),
        "window-days": days,
        "normalize": normalize_label,
        "m": m,
        "delay": delay,
        "eps": eps_input,
        "eps-mode": eps_mode_label,
        "theiler": theiler,
        "l-min": l_min,
        "v-min": v_min,
    });
    write_run_meta(
        &mut out,
        &RunMeta { command: "rqa", parameters, inputs: loaded.digests, notes: vec![] },
    )
}

pub fn corr(args: CorrArgs) -> Result<(), CliError> {
    let mut run = inputs::panel_prologue(&args.common)?;
    let bins = args.bins.or(run.cfg.bins).unwrap_or(50);
    let c = CorrelationMatrix::from_panel(&run.panel)?;
    let hist = c.coefficient_distribution(bins)?;

    run.out.write("correlation.csv", &render(|b| c.write_csv(b)))?;
    let hist_value = serde_json::to_value(&hist).expect("histogram serializes");
    run.out.write("corr_hist.json", &jsonnum::to_bytes(&hist_value))?;

    run.base_parameters.insert("bins".into(), json!(bins));
    write_run_meta(
        &mut run.out,
        &RunMeta {
            command: "corr",
            parameters: run.base_parameters.into(),
            inputs: run.digests,
            notes: vec![],
        },
    )
}

pub fn modes(args: ModesArgs) -> Result<(), CliError> {
    let mut run = inputs::panel_prologue(&args.common)?;
    let n_group = args.n_group.or(run.cfg.n_group).unwrap_or(5);
    let c = CorrelationMatrix::from_panel(&run.panel)?;
    let decomposition = spectral::decompose(&c, n_group)?;

    let mut notes = Vec::new();
    let bounds = match spectral::mp_bounds(run.panel.n_series(), run.panel.n_obs()) {
        Ok(b) => Some(b),
        Err(e) => {
            notes.push(format!("mp_bounds unavailable: {e}"));
            None
        }
    };

    run.out
        .write("modes.json", &jsonnum::to_bytes(&decomposition.summary_json(bounds.as_ref())))?;
    run.out
        .write("market.csv", &render(|b| decomposition.write_component_csv(b, &decomposition.market)))?;
    run.out
        .write("group.csv", &render(|b| decomposition.write_component_csv(b, &decomposition.group)))?;
    run.out
        .write("random.csv", &render(|b| decomposition.write_component_csv(b, &decomposition.random)))?;

    run.base_parameters.insert("n-group".into(), json!(n_group));
    write_run_meta(
        &mut run.out,
        &RunMeta {
            command: "modes",
            parameters: run.base_parameters.into(),
            inputs: run.digests,
            notes,
        },
    )
}

pub fn partial(args: PartialArgs) -> Result<(), CliError> {
    let mut run = inputs::panel_prologue(&args.common)?;
    let market = config::require(args.market.clone().or_else(|| run.cfg.market.clone()), "market")?;
    let bins = args.bins.or(run.cfg.bins).unwrap_or(50);
    let full_tensor = args.full_tensor || run.cfg.full_tensor.unwrap_or(false);

    let c = CorrelationMatrix::from_panel(&run.panel)?;
    let set = partialcorr::conditioned_on_market(&c, &market)?;

    run.out.write(
        "partial_given_market.csv",
        &render(|b| write_labeled_matrix(b, set.stock_tickers(), set.given_market())),
    )?;
    run.out.write(
        "avg_influence.csv",
        &render(|b| write_labeled_matrix(b, set.stock_tickers(), set.avg_influence())),
    )?;
    let hist = set.influence_distribution(bins)?;
    let hist_value = serde_json::to_value(&hist).expect("histogram serializes");
    run.out.write("influence_hist.json", &jsonnum::to_bytes(&hist_value))?;

    let (pair_mean, pair_max) = set.pair_partial_over_z()?;
    run.out.write(
        "pair_partial_mean.csv",
        &render(|b| write_labeled_matrix(b, set.stock_tickers(), &pair_mean)),
    )?;
    run.out.write(
        "pair_partial_max.csv",
        &render(|b| write_labeled_matrix(b, set.stock_tickers(), &pair_max)),
    )?;
    if full_tensor {
        run.out.write("influence_tensor.csv", &render(|b| set.write_full_tensor(b)))?;
    }

    run.base_parameters.insert("market".into(), json!(market));
    run.base_parameters.insert("bins".into(), json!(bins));
    run.base_parameters.insert("full-tensor".into(), json!(full_tensor));
    write_run_meta(
        &mut run.out,
        &RunMeta {
            command: "partial",
            parameters: run.base_parameters.into(),
            inputs: run.digests,
            notes: vec![],
        },
    )
}
