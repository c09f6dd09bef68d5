use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hivdde", version, about = "Delayed HIV/AIDS model with education campaigns")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the six-compartment model and write the trajectory.
    Simulate(SimulateArgs),
    /// Fit (beta0, eta, gamma0, q) to the observation data.
    Fit(FitArgs),
    /// Equilibria, stability verdicts and permanence bounds.
    Analyze(AnalyzeArgs),
    /// tau sweep of the endemic state, G curve and beta0 stability scan.
    Sweep(SweepArgs),
    /// Integrate the information-free SI model.
    Si(SiArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    JsonLines,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Parameter file with `name = value` lines.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Published fit row used as the base parameter set.
    #[arg(long, default_value_t = 6.0)]
    pub fit_row: f64,
    /// Override one parameter, e.g. `--set beta0=0.02`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Delay u in years.
    #[arg(long)]
    pub delay: Option<f64>,
    /// Output directory.
    #[arg(long, env = "HIVDDE_OUT_DIR", default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    /// Worker threads for grid work (default: available cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Sample times `t0:t1:dt`.
    #[arg(long, default_value = "0:15:0.1")]
    pub tspan: String,
    /// Initial state `S0,S1,S2,Z,I,R` (default: 1992 Uganda).
    #[arg(long)]
    pub x0: Option<String>,
    /// Dataset (`builtin` or a file) to pair with model samples.
    #[arg(long)]
    pub data: Option<String>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "builtin")]
    pub data: String,
    /// Comma-separated delays for a grid of fits; overrides `--delay`.
    #[arg(long)]
    pub delays: Option<String>,
    /// Initial guess `beta0,eta,gamma0,q`.
    #[arg(long, default_value = "0.028,0.041,0.264,0.071")]
    pub guess: String,
    /// Initial state `S0,S1,S2,Z,I,R` (default: 1992 Uganda).
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// `lo:hi:n,log|lin`.
    #[arg(long, default_value = "0.1:1000:50,log")]
    pub tau_grid: String,
    /// `lo:hi:n` absolute beta0 values, evaluated at u = 0.
    #[arg(long)]
    pub beta0_scan: Option<String>,
    /// Points on the G curve over `[0, B/(mu+d)]`.
    #[arg(long, default_value_t = 1001)]
    pub g_points: usize,
}

#[derive(Debug, Args)]
pub struct SiArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "0:15:0.1")]
    pub tspan: String,
    /// Initial `S0,I` held as constant history.
    #[arg(long, default_value = "5.014983,0.884997")]
    pub x0: String,
}
