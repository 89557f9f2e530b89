//! Command-line front end: configuration, dispatch and CSV output.

pub mod config;
pub mod csv;
mod run;

use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub use config::{parse_config, RunConfig};
pub use run::{execute, run_command, Overrides};

use crate::error::OmitError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("numerical: {0}")]
    Numerical(#[from] OmitError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Output powers over the detuning grid.
    Response,
    /// Absorption channels.
    Channels,
    /// Normalized photon and phonon excitations over the grid.
    Energy,
    /// Unilateral locus, window sensitivity, decay curve or ratio scan.
    Phase,
    /// Channel positions and excitations for |G| in {2, 4, 6} kappa.
    Table1,
    /// Time-domain integration against the sideband amplitudes.
    OracleCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Eq8,
    Eq11,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhaseModeArg {
    Locus,
    Sensitivity,
    Decay,
    Ratio,
}

#[derive(Debug, Parser)]
#[command(name = "inverse-omit", version, about = "Multi-channel inverse OMIT spectra, channels and phase metrology")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration; the bundled identical-resonator setup when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
    /// Channel exactness tolerance, or the phase feasibility tolerance for `phase`.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Number of detuning grid points.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub parallel: Option<usize>,
    /// `oracle-check` only: write the first integrated trajectory as CSV.
    #[arg(long)]
    pub dump_trajectory: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub phase_mode: Option<PhaseModeArg>,
}
