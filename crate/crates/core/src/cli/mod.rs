//! Command-line driver: `limits`, `simulate`, `estimate` and `verify`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 I/O error,
//! 3 numerical failure.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{
    cmd_estimate, cmd_limits, cmd_simulate, cmd_verify, estimate_pair, read_matrix_csv,
    run_simulation, Estimate, EstimateResult, Regime, RunResult, Theory, VerifyReport,
};
pub use config::{default_detect_margin, ExperimentConfig, OutputFormat, SamplerChoice};
pub use output::{emit, render, Report};

use crate::error::{Error, Result};
use crate::model::{DimensionRatios, SpikeSpectrum};

#[derive(Debug, Parser)]
#[command(
    name = "spiked-cca",
    version,
    about = "Spiked canonical correlation analysis: limits, simulation, estimation"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON experiment file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed of the configuration
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; overrides `outputs` of the configuration
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// p = 100, q = 200, n = 1000, spikes 0.8 0.7 0.6 0.16 0.15, 100 replicates
    Figure1,
    /// p = 500, q = 1000, n = 5000, same spikes, 20 replicates
    Figure1Full,
}

impl Preset {
    fn config(self) -> ExperimentConfig {
        match self {
            Preset::Figure1 => ExperimentConfig::figure1(),
            Preset::Figure1Full => ExperimentConfig::figure1_full(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bulk edges, threshold and outlier limits for given ratios and spikes
    Limits {
        #[arg(long, requires = "c2")]
        c1: Option<f64>,
        #[arg(long, requires = "c1")]
        c2: Option<f64>,
        /// Comma-separated nonincreasing spikes in (0, 1]
        #[arg(long, value_delimiter = ',')]
        spikes: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
    },
    /// Monte Carlo replicates of the leading squared canonical correlations
    Simulate {
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long)]
        replicates: Option<usize>,
    },
    /// Detects outliers in data files and estimates their spikes
    Estimate {
        /// CSV matrix, one variable per row
        #[arg(long)]
        x: PathBuf,
        /// CSV matrix, one variable per row
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        detect_margin: Option<f64>,
        /// Subtract row means first
        #[arg(long)]
        center: bool,
    },
    /// Checks the finite-n determinant equation on simulated data
    Verify {
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long)]
        replicates: Option<usize>,
    },
}

fn experiment(
    common: &Common,
    preset: Option<Preset>,
    replicates: Option<usize>,
) -> Result<ExperimentConfig> {
    let mut cfg = match (&common.config, preset) {
        (Some(path), None) => ExperimentConfig::load(path).map_err(|e| match e {
            Error::Io(io) => Error::Io(std::io::Error::new(
                io.kind(),
                format!("{}: {io}", path.display()),
            )),
            other => other,
        })?,
        (None, Some(p)) => p.config(),
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "give either --config or --preset, not both".into(),
            ))
        }
        (None, None) => {
            return Err(Error::Config(
                "one of --config or --preset is required".into(),
            ))
        }
    };
    if let Some(seed) = common.seed {
        cfg.model.seed = seed;
    }
    if let Some(format) = common.format {
        cfg.outputs = vec![format];
    }
    if let Some(r) = replicates {
        cfg.replicates = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn formats(common: &Common) -> Vec<OutputFormat> {
    vec![common.format.unwrap_or(OutputFormat::Json)]
}

pub fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    let out = common.out.as_deref();
    match cli.command {
        Command::Limits {
            c1,
            c2,
            spikes,
            preset,
        } => {
            let (ratios, default_spikes) = match (c1.zip(c2), &common.config, preset) {
                (Some((a, b)), None, None) => (DimensionRatios::new(a, b)?, SpikeSpectrum::empty()),
                (None, _, _) => {
                    let cfg = experiment(common, preset, None)?;
                    (cfg.model.ratios()?, cfg.model.spikes.clone())
                }
                _ => {
                    return Err(Error::Config(
                        "give ratios through --c1/--c2 or through --config/--preset, not both"
                            .into(),
                    ))
                }
            };
            let spikes = match spikes {
                Some(s) => SpikeSpectrum::new(s)?,
                None => default_spikes,
            };
            emit(&cmd_limits(ratios, &spikes)?, &formats(common), out)
        }
        Command::Simulate { preset, replicates } => {
            let cfg = experiment(common, preset, replicates)?;
            emit(&cmd_simulate(&cfg)?, &cfg.outputs, out)
        }
        Command::Estimate {
            x,
            y,
            detect_margin,
            center,
        } => emit(
            &cmd_estimate(&x, &y, detect_margin, center)?,
            &formats(common),
            out,
        ),
        Command::Verify { preset, replicates } => {
            let cfg = experiment(common, preset, replicates)?;
            emit(&cmd_verify(&cfg)?, &cfg.outputs, out)
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
