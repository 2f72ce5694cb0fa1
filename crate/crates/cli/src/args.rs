use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "qfc",
    version,
    about = "EPR correlation after intracavity sum-frequency conversion"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

/// Cavity parameters are ratios to gamma1.
#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// gamma3 / gamma1
    #[arg(long, global = true)]
    pub gamma3: Option<f64>,

    /// rho1 / gamma1
    #[arg(long, global = true)]
    pub rho1: Option<f64>,

    /// rho3 / gamma1
    #[arg(long, global = true)]
    pub rho3: Option<f64>,

    /// chiE / gamma1
    #[arg(long, global = true)]
    pub pump: Option<f64>,

    /// Squeezing factor of the EPR source
    #[arg(long, global = true)]
    pub r: Option<f64>,

    /// Normalized analysis frequency omega tau / gamma1
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega: Option<f64>,

    /// Output file; a run manifest is written next to it
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// key=value or JSON file with parameter defaults
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Print machine-readable JSON instead of text
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Optimal correlation at one operating point
    Point,
    /// S_min versus analysis frequency, one column per r
    Spectrum(SpectrumArgs),
    /// S_min versus pump parameter
    PumpSweep(PumpSweepArgs),
    /// S_min versus squeezing factor
    SqueezeSweep(GridArgs),
    /// Closed form against oracle consistency batteries
    Verify(VerifyArgs),
    /// Time-domain simulation compared with the analytic spectrum
    Montecarlo(MonteCarloArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub start: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub stop: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub grid: GridArgs,

    /// Squeezing factors, one column each
    #[arg(long, value_delimiter = ',', default_value = "0.6,1,2")]
    pub rs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Gamma3,
    R,
}

#[derive(Debug, Clone, Args)]
pub struct PumpSweepArgs {
    #[command(flatten)]
    pub grid: GridArgs,

    /// Parameter distinguishing the curves
    #[arg(long, value_enum, default_value = "gamma3")]
    pub family: Family,

    /// Curve values; defaults to 0.6,1,1.4 for gamma3 and 0.6,1,2 for r
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = qfc_core::verify::DEFAULT_DRAWS)]
    pub draws: usize,

    /// Perturb one closed-form coefficient to check that the batteries notice
    #[arg(long)]
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Args)]
pub struct MonteCarloArgs {
    #[arg(long)]
    pub dt: Option<f64>,

    #[arg(long)]
    pub duration: Option<f64>,

    /// Welch segment length in samples
    #[arg(long)]
    pub segment: Option<usize>,

    #[arg(long)]
    pub overlap: Option<f64>,

    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5,2")]
    pub omegas: Vec<f64>,

    /// Also dump a short single-trajectory trace as CSV
    #[arg(long)]
    pub trace: Option<PathBuf>,

    #[arg(long, default_value_t = 10_000)]
    pub trace_len: usize,

    /// Skip the zero-pump calibration run
    #[arg(long)]
    pub skip_calibration: bool,
}
