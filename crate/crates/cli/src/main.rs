//! `mesonet`: recurrence, spectral and network analysis of price panels.
//!
//! Every subcommand reads price CSVs (files or stdin), writes fixed-name
//! exports under `--out` plus a `run_meta.json` echoing the effective
//! parameters and input digests, and fails with a single
//! `error_code: message` line on stderr. Re-running a command with the
//! same inputs and config produces byte-identical outputs.

mod analysis;
mod config;
mod geometry;
mod inputs;
mod jsonnum;
mod meta;
mod synthcmd;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use mesonet_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mesonet", version, about = "Recurrence, spectral and network analysis of market index panels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every panel-reading subcommand. All of them may also
/// be supplied through `--config`; flags win over the file.
#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Input price CSV (repeatable); "-" reads stdin. Default: stdin
    #[arg(long)]
    pub input: Vec<String>,
    /// JSON file supplying defaults for any long flag (kebab-case keys)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing). Default: current directory
    #[arg(long)]
    pub out: Option<String>,
    /// Date alignment across series: intersect | forward-fill
    #[arg(long)]
    pub alignment: Option<String>,
    /// First observation of the analysis window (YYYY-MM-DD, a panel date)
    #[arg(long)]
    pub window_start: Option<String>,
    /// Number of observations; without --window-start, the trailing ones
    #[arg(long)]
    pub window_days: Option<usize>,
}

#[derive(Args, Debug)]
pub struct RqaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Series to analyze; may be omitted when exactly one is loaded
    #[arg(long)]
    pub ticker: Option<String>,
    /// Level normalization before embedding: max | range | none
    #[arg(long)]
    pub normalize: Option<String>,
    /// Embedding dimension
    #[arg(long)]
    pub m: Option<usize>,
    /// Embedding delay in samples
    #[arg(long)]
    pub delay: Option<usize>,
    /// Recurrence threshold (see --eps-mode)
    #[arg(long)]
    pub eps: Option<f64>,
    /// eps interpretation: relative (fraction of max diameter) | absolute
    #[arg(long)]
    pub eps_mode: Option<String>,
    /// Half-width of the diagonal band excluded from line statistics
    #[arg(long)]
    pub theiler: Option<usize>,
    /// Shortest diagonal counted as a line
    #[arg(long)]
    pub l_min: Option<usize>,
    /// Shortest vertical counted as a line
    #[arg(long)]
    pub v_min: Option<usize>,
}

#[derive(Args, Debug)]
pub struct CorrArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Histogram bins for the coefficient distribution
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ModesArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of sub-leading eigenmodes assigned to the group component
    #[arg(long)]
    pub n_group: Option<usize>,
}

#[derive(Args, Debug)]
pub struct PartialArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Ticker of the market index to condition on
    #[arg(long)]
    pub market: Option<String>,
    /// Histogram bins for the influence distribution
    #[arg(long)]
    pub bins: Option<usize>,
    /// Also write the full (x, y, z) influence tensor
    #[arg(long)]
    pub full_tensor: bool,
}

#[derive(Args, Debug)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct MdsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Embedding dimensions (coordinates per point)
    #[arg(long)]
    pub dims: Option<usize>,
    /// Polish the embedding by stress majorization
    #[arg(long)]
    pub refine: bool,
    /// ticker,label manifest coloring the SVG scatter by group
    #[arg(long)]
    pub groups: Option<String>,
}

#[derive(Args, Debug)]
pub struct DendroArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct MstArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Tree construction: kruskal | prim (identical result, two routes)
    #[arg(long)]
    pub algorithm: Option<String>,
}

#[derive(Args, Debug)]
pub struct SectorArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Embedding dimensions for the map export
    #[arg(long)]
    pub dims: Option<usize>,
    /// Polish the embedding by stress majorization
    #[arg(long)]
    pub refine: bool,
    /// Tree construction: kruskal | prim
    #[arg(long)]
    pub algorithm: Option<String>,
    /// Color the map by this many dendrogram clusters
    #[arg(long)]
    pub clusters: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// JSON file supplying defaults for any long flag (kebab-case keys)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; without it the price CSV goes to stdout
    #[arg(long)]
    pub out: Option<String>,
    /// RNG seed; equal seeds reproduce the panel bit for bit
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of stocks (inferred from --sectors when omitted)
    #[arg(long)]
    pub n_stocks: Option<usize>,
    /// Number of return observations
    #[arg(long)]
    pub n_days: Option<usize>,
    /// Idiosyncratic noise level
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Lower edge of the market-beta interval
    #[arg(long)]
    pub beta_min: Option<f64>,
    /// Upper edge of the market-beta interval
    #[arg(long)]
    pub beta_max: Option<f64>,
    /// Sector layout: "KxS" (K sectors of S stocks) or "size:loading,..."
    #[arg(long)]
    pub sectors: Option<String>,
    /// Price level every series starts from
    #[arg(long)]
    pub start_price: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Recurrence plot and quantification of one level series
    Rqa(RqaArgs),
    /// Equal-time correlation matrix and coefficient histogram
    Corr(CorrArgs),
    /// Eigenmode split into market, group and random components
    Modes(ModesArgs),
    /// Market-conditioned partial correlations and influences
    Partial(PartialArgs),
    /// Correlation-metric distance matrix
    Distance(DistanceArgs),
    /// Planar map of the correlation metric (classical scaling)
    Mds(MdsArgs),
    /// Ward dendrogram in Newick form
    Dendro(DendroArgs),
    /// Minimum spanning tree as DOT and edge list
    Mst(MstArgs),
    /// Full pipeline: correlation, distance, map, dendrogram, tree
    Sector(SectorArgs),
    /// Synthetic factor-model price panel
    Synth(SynthArgs),
}

/// Anything a subcommand can fail with, carrying its exit identity.
#[derive(Debug)]
pub enum CliError {
    /// Flags or config file do not assemble into a valid run.
    Config(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn io(path: &str, e: &std::io::Error) -> CliError {
        CliError::Core(Error::Io { path: path.into(), detail: e.to_string() })
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                Error::Io { .. } => 3,
                Error::Parse { .. } => 4,
                Error::EmptyInput { .. }
                | Error::NonPositivePrice { .. }
                | Error::NonMonotonicDates { .. }
                | Error::DuplicateTicker { .. } => 5,
                Error::UnknownTicker { .. } => 6,
                Error::WindowOutOfRange { .. } => 7,
                Error::InsufficientData { .. } => 8,
                Error::ZeroVariance { .. }
                | Error::DegenerateConditioning { .. }
                | Error::OutOfRange { .. } => 9,
                Error::NoConvergence { .. } => 10,
                Error::InvalidParameter { .. } => 11,
            },
        }
    }

    fn code_name(&self) -> &'static str {
        match self.exit_code() {
            2 => "malformed_config",
            3 => "io_error",
            4 => "parse_error",
            5 => "invalid_data",
            6 => "unknown_ticker",
            7 => "window_out_of_range",
            8 => "insufficient_data",
            9 => "degenerate_input",
            10 => "no_convergence",
            _ => "invalid_parameter",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

fn thread_pool_from_env() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("MESONET_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("MESONET_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the thread pool: {e}")))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Rqa(a) => analysis::rqa(a),
        Command::Corr(a) => analysis::corr(a),
        Command::Modes(a) => analysis::modes(a),
        Command::Partial(a) => analysis::partial(a),
        Command::Distance(a) => geometry::distance(a),
        Command::Mds(a) => geometry::mds(a),
        Command::Dendro(a) => geometry::dendro(a),
        Command::Mst(a) => geometry::mst(a),
        Command::Sector(a) => geometry::sector(a),
        Command::Synth(a) => synthcmd::synth(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // First line only: errors stay machine-parseable.
            let line = e.to_string();
            let line = line.lines().next().unwrap_or("invalid arguments");
            eprintln!("malformed_config: {}", line.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    let outcome = thread_pool_from_env().and_then(|()| run(cli.command));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}: {}", e.code_name(), e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
