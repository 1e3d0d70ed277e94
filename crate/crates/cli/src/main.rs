// SPDX-License-Identifier: MIT OR Apache-2.0

//! `driftwatch`: simulate, estimate, test, segment and forecast diffusion
//! series, and run Monte Carlo studies.
//!
//! Exit codes: 0 success, 1 usage or domain error, 2 data error, 3 estimation
//! failure. Results go to stdout or `--out`; diagnostics go to stderr.

#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use driftwatch_core::{changepoint::TrimKind, Error, ModelKind};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{0}")]
    Core(#[from] Error),
}

impl CliError {
    pub fn output(e: impl std::fmt::Display) -> Self {
        Self::Data(format!("cannot write output: {e}"))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
            Self::Core(e) => match e.root() {
                Error::Shape { .. } | Error::Domain(_) => 1,
                Error::Data(_) | Error::DegenerateScale(_) | Error::Table(_) => 2,
                Error::Estimation(_) => 3,
                Error::Forecast { .. } => 3,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "driftwatch",
    version,
    about = "Robust CUSUM tests for dispersion changes in diffusions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate an Euler path, optionally with a parameter change and outliers.
    Simulate(SimulateArgs),
    /// Fit the minimum density power divergence estimate.
    Estimate(EstimateArgs),
    /// Trimmed-residual CUSUM test for a change in dispersion.
    Test(TestArgs),
    /// Locate several change points by binary segmentation.
    Segment(SegmentArgs),
    /// Rolling one-step-ahead forecasts.
    Forecast(ForecastArgs),
    /// Monte Carlo size and power study.
    Mc(McArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// CSV with header `t,x`, or a single `x` column.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Observation step; required without a `t` column.
    #[arg(long)]
    h: Option<f64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    model: ModelKind,
    /// Drift parameters, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    theta: Vec<f64>,
    #[arg(long)]
    sigma: f64,
    /// Number of increments; the path has n + 1 points.
    #[arg(long)]
    n: usize,
    /// Step exponent: h = n^-gamma.
    #[arg(long, default_value_t = 0.75, conflicts_with = "h")]
    gamma: f64,
    /// Explicit observation step instead of n^-gamma.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, default_value_t = 20)]
    substeps: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    x0: f64,
    #[arg(long)]
    seed: u64,
    /// Outliers as `p,var_v`.
    #[arg(long, value_delimiter = ',', value_name = "P,VAR_V")]
    contaminate: Option<Vec<f64>>,
    /// Change as `frac,theta1...,sigma1`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    change: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    model: ModelKind,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Debug, Args)]
struct TrimArgs {
    #[arg(long, default_value = "tent")]
    trim: TrimKind,
    /// Truncation constant.
    #[arg(long = "M", default_value_t = driftwatch_core::changepoint::M_995)]
    m: f64,
}

#[derive(Debug, Args)]
struct TestArgs {
    #[arg(long)]
    model: ModelKind,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[command(flatten)]
    trim: TrimArgs,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    #[arg(long)]
    model: ModelKind,
    /// Divergence exponent used for the tests.
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    /// Extra exponents for which each final segment is re-estimated.
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    #[command(flatten)]
    trim: TrimArgs,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    /// Smallest segment, in observations, that may be split off.
    #[arg(long, default_value_t = 30)]
    min_segment: usize,
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Debug, Args)]
struct ForecastArgs {
    #[arg(long)]
    model: ModelKind,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[command(flatten)]
    input: InputArgs,
    /// First forecast origin.
    #[arg(long)]
    eval_start: usize,
    /// First observation used for estimation.
    #[arg(long = "from", default_value_t = 0)]
    from_index: usize,
    #[arg(long, default_value_t = 1)]
    refit_every: usize,
    /// CSV of forecast records.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct McArgs {
    /// JSON study description.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in study: table1..table6, fig1, fig2.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Base seed; required with --preset.
    #[arg(long, required_unless_present = "config")]
    seed: Option<u64>,
    /// Outlier variance override for presets.
    #[arg(long)]
    var_v: Option<f64>,
    /// Post-change parameters `theta1...,sigma1` for power presets.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alt: Option<Vec<f64>>,
    #[arg(long, default_value = "csv")]
    format: driftwatch_core::TableFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("DRIFTWATCH_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("DRIFTWATCH_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Test(a) => commands::test(a),
        Command::Segment(a) => commands::segment(a),
        Command::Forecast(a) => commands::forecast(a),
        Command::Mc(a) => commands::mc(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("driftwatch: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
