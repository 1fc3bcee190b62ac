//! Command-line front end: every subcommand writes plot-ready CSV/JSON files
//! plus a `manifest.json` into the output directory.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thermal_pulses::fock_oracle::{DEFAULT_GUARDRAIL, GUARDRAIL_ENV};

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_GUARDRAIL: u8 = 3;
pub const EXIT_ORACLE: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "thermal-pulses", version, about = "Localized-pulse statistics of filtered thermal light")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Number of frequency modes (odd). Ignored when the spectrum comes from a file.
    #[arg(long = "modes", global = true, default_value_t = 21)]
    pub modes: usize,

    /// Quantization length. Ignored when the spectrum comes from a file.
    #[arg(long = "length", global = true, default_value_t = 1.0)]
    pub length: f64,

    /// Output directory, created if missing.
    #[arg(long = "out", global = true, default_value = "out")]
    pub out: PathBuf,

    /// JSON spectrum file or builtin:flat|linear|gaussian|blackbody:key=value,...
    #[arg(long = "spectrum", global = true, default_value = "builtin:flat:n=0.1")]
    pub spectrum: String,

    /// Largest Fock-space dimension the oracle may allocate.
    #[arg(long = "guardrail", global = true, env = GUARDRAIL_ENV, default_value_t = DEFAULT_GUARDRAIL)]
    pub guardrail: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    General,
    Flat,
    Weak,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Unit {
    /// Multiples of the pulse spacing l = L/N.
    Pulse,
    /// Plain length units.
    Length,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lambda matrix, localized covariance and independence measure.
    Lambda,
    /// G1, G2 and normalized g2 over a position grid.
    Corr {
        #[arg(long = "z-grid", default_value = "linspace:0:5:201")]
        z_grid: String,
        #[arg(long = "z-unit", value_enum, default_value_t = Unit::Pulse)]
        z_unit: Unit,
        /// Flat and weak models need a flat spectrum.
        #[arg(long = "model", value_enum, default_value_t = Model::General)]
        model: Model,
    },
    /// Weak-limit expansion of the flat state in localized pulses.
    Weak {
        #[arg(long = "n", default_value_t = 1e-3)]
        n: f64,
        #[arg(long = "order", default_value_t = 2)]
        order: usize,
        #[arg(long = "z-grid", default_value = "linspace:0:5:201")]
        z_grid: String,
        #[arg(long = "z-unit", value_enum, default_value_t = Unit::Pulse)]
        z_unit: Unit,
    },
    /// Fidelity of linearly sloped spectra with their mean flat spectrum.
    SweepLinear {
        /// Comma-separated n_min values, one output file each.
        #[arg(long = "n-min", default_value = "0.01,0.1,0.5")]
        n_min: String,
        /// Δn grid in absolute units.
        #[arg(long = "delta-grid", conflicts_with = "relative_grid")]
        delta_grid: Option<String>,
        /// Δn grid in units of n_min.
        #[arg(long = "relative-grid", default_value = "linspace:0:3:61")]
        relative_grid: String,
    },
    /// Optimized flat-state fidelity against Gaussian spectra.
    SweepGaussian {
        #[arg(long = "r-grid", default_value = "geomspace:1e-3:10:41")]
        r_grid: String,
        #[arg(long = "omega0", default_value_t = 0.0)]
        omega0: f64,
        #[arg(long = "half-range", default_value_t = thermal_pulses::spectra::GAUSSIAN_HALF_RANGE)]
        half_range: f64,
    },
    /// Run the oracle equivalence suites and print a JSON report.
    OracleCheck {
        #[arg(long = "seed", default_value_t = thermal_pulses::verification::DEFAULT_SEED)]
        seed: u64,
        /// Fixed per-mode photon cutoff for the three-mode and single-mode suites.
        #[arg(long = "cutoff")]
        cutoff: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
