//! `optobell`: probe, optimize, sweep and verify CHSH statistics of
//! optomechanically generated photon pairs.

mod commands;
mod config;
mod record;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use optobell_core::optimizer::Axis;
use optobell_core::sweep::{PStrategy, Series};
use optobell_core::Complex64;

use config::{parse_axis, parse_complex, parse_series, parse_strategy};

#[derive(Debug, Parser)]
#[command(name = "optobell", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON config file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Pseudo-random seed of the optimizer or the randomized suite.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file: CSV for `sweep`, the JSON record otherwise.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Add wall-clock time to the record (output is then no longer reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
    /// Pair-creation probability.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Mapping transmission of the second arm.
    #[arg(long = "T", global = true, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Detector efficiency.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Initial mechanical occupation.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub n0: Option<f64>,
    /// Optimizer restarts.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Optimize over complex settings instead of real ones.
    #[arg(long, global = true)]
    pub complex: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Click probabilities and correlator for one pair of settings.
    Probe {
        /// First-arm displacement, `re` or `re,im`.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        alpha1: Option<Complex64>,
        /// Second-arm displacement, `re` or `re,im`.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        alpha2: Option<Complex64>,
    },
    /// CHSH value maximized over the settings.
    Chsh {
        /// Also maximize over the pair-creation probability.
        #[arg(long)]
        optimize_p: bool,
    },
    /// Optimized CHSH along one parameter axis, as CSV and optional SVG.
    Sweep {
        /// SVG line chart output.
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
        #[arg(long, value_parser = parse_axis)]
        axis: Option<Axis>,
        #[arg(long, allow_negative_numbers = true)]
        min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// `fixed-p` or `p-optimized`.
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<PStrategy>,
        /// One curve per value, `AXIS=v1,v2,...`.
        #[arg(long, value_parser = parse_series)]
        series: Option<Series>,
    },
    /// Compare closed forms with the Fock-space oracle on a randomized suite.
    OracleCheck {
        /// Number of randomized cases.
        #[arg(long)]
        cases: Option<usize>,
        /// Restrict the suite to lossless cases.
        #[arg(long)]
        lossless: bool,
        #[arg(long, hide = true, allow_negative_numbers = true)]
        corrupt: Option<f64>,
    },
    /// Model parameters and regime report of a device.
    Device {
        /// Cavity linewidth in Hz.
        #[arg(long)]
        kappa_hz: Option<f64>,
        /// Ratio encoding "much smaller than".
        #[arg(long)]
        margin: Option<f64>,
    },
    /// Optimized CHSH across a scan of cavity linewidths.
    Feasibility {
        /// Lower end of the linewidth scan in Hz.
        #[arg(long)]
        kappa_min: Option<f64>,
        /// Upper end of the linewidth scan in Hz.
        #[arg(long)]
        kappa_max: Option<f64>,
        #[arg(long)]
        kappa_steps: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::INVALID_INPUT)
        }
    }
}
