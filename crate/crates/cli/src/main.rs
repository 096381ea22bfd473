mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Conditioning, Overrides, RunConfig, SplitValue};
use error::CliError;

/// Hour-by-hour ARMA forecasting and scenario generation for PV power.
#[derive(Parser)]
#[command(name = "pvarma", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Select and fit one model per daylight hour; writes models.json.
    Fit,
    /// One-step forecasts over the test window; writes predictions.csv and metrics.json.
    Predict,
    /// Day-ahead scenarios; writes scenarios.csv, quantiles.csv and manifest.json.
    Simulate,
    /// Hourly ARMA vs single ARMA vs Smart-Persistence; writes comparison.csv.
    Compare,
}

#[derive(Args)]
struct Flags {
    /// Hourly CSV with header `date,hour,power_mw`.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// TOML file with any of the settings below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// models.json to read (default: <out>/models.json).
    #[arg(long, global = true)]
    models: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Held-out fraction of days, or the first test date (YYYY-MM-DD).
    #[arg(long, global = true)]
    split: Option<String>,
    #[arg(long, global = true)]
    scenarios: Option<usize>,
    /// Largest p and q tried.
    #[arg(long, global = true)]
    grid_max: Option<usize>,
    /// Smallest p and q tried.
    #[arg(long, global = true)]
    grid_min: Option<usize>,
    /// Ljung-Box lags, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    lags: Option<Vec<usize>>,
    /// Quantile probabilities, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    quantiles: Option<Vec<f64>>,
    /// Hours whose training output never exceeds this (MW) are night.
    #[arg(long, global = true, allow_negative_numbers = true)]
    night_threshold: Option<f64>,
    /// Where scenario sampling starts.
    #[arg(long, global = true, value_enum)]
    conditioning: Option<Conditioning>,
    /// Smart-Persistence window length.
    #[arg(long, global = true)]
    persistence_window: Option<usize>,
}

impl Flags {
    fn into_overrides(self) -> (Option<PathBuf>, Overrides) {
        let overrides = Overrides {
            data: self.data,
            models: self.models,
            out: self.out,
            split: self.split.map(SplitValue::Text),
            grid_min: self.grid_min,
            grid_max: self.grid_max,
            lags: self.lags,
            scenarios: self.scenarios,
            quantiles: self.quantiles,
            seed: self.seed,
            night_threshold: self.night_threshold,
            conditioning: self.conditioning,
            persistence_window: self.persistence_window,
            persistence_mode: None,
        };
        (self.config, overrides)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (config_path, flags) = cli.flags.into_overrides();
    let file = config_path.as_deref().map(Overrides::from_file).transpose()?;
    let cfg = RunConfig::resolve(file, flags)?;
    match cli.command {
        Command::Fit => commands::fit(&cfg),
        Command::Predict => commands::predict(&cfg),
        Command::Simulate => commands::simulate(&cfg),
        Command::Compare => commands::compare(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
