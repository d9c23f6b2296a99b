//! `qaoa-limits` command-line front end.

mod commands;
mod files;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser, Serialize)]
#[command(name = "qaoa-limits", version, about = "Infinite-size and finite-size QAOA energies and angle prediction")]
pub struct Cli {
    /// Worker threads (defaults to the number of available cores).
    #[arg(long, global = true, env = "QAOA_LIMITS_THREADS")]
    pub threads: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Optimize an infinite-size energy and report the best angles.
    Predict(PredictArgs),
    /// Rescale SK angles to MaxCut angles for mean degree d.
    Transfer(TransferArgs),
    /// Monte-Carlo estimate of the finite-size SK energy.
    Mc(McArgs),
    /// Exact statevector energy on a graph or SK instance.
    Simulate(SimulateArgs),
    /// Guessed-angles experiment on small random graphs.
    Experiment(ExperimentArgs),
    /// Depth-one energy grid over (β, γ), or over one layer of deeper angles.
    Landscape(LandscapeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Er,
    Sk,
    ChungLu,
    DilutedP1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Er,
    ChungLu,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// Mean degree (ER, diluted).
    #[arg(long)]
    pub d: Option<f64>,
    /// Degree distribution `d1:q1,d2:q2,...` (Chung-Lu).
    #[arg(long)]
    pub dist: Option<String>,
    /// Interaction arity of the diluted model.
    #[arg(long, default_value_t = 2)]
    pub arity: usize,
    #[arg(long, default_value_t = 100)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Function evaluations per local optimization.
    #[arg(long, default_value_t = 4000)]
    pub budget: usize,
    /// Also write the best angles as an angle file.
    #[arg(long)]
    pub angles_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TransferArgs {
    /// SK angle file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub d: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct McArgs {
    #[arg(long)]
    pub n: usize,
    /// Angle file.
    #[arg(long)]
    pub angles: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run even at p ≥ 4, where the variance bound is astronomically large.
    #[arg(long)]
    pub force: bool,
    /// Write every sample as CSV (`sample_index,value`).
    #[arg(long)]
    pub samples_csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Graph file; mutually exclusive with --sk-n.
    #[arg(long, conflicts_with = "sk_n")]
    pub graph: Option<PathBuf>,
    /// Simulate a random SK instance with this many spins.
    #[arg(long)]
    pub sk_n: Option<usize>,
    /// Angle file. Required unless --restarts is positive.
    #[arg(long)]
    pub angles: Option<PathBuf>,
    /// Optimize the angles on this instance from random starts first.
    #[arg(long, default_value_t = 0)]
    pub restarts: usize,
    #[arg(long, default_value_t = 300)]
    pub budget: usize,
    /// Measurement shots for cut statistics (graphs only).
    #[arg(long, default_value_t = 0)]
    pub shots: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the restart trace as CSV (`restart,iterations,final_value`).
    #[arg(long)]
    pub trace_csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExperimentArgs {
    #[arg(long, value_enum, default_value_t = EnsembleKind::Er)]
    pub ensemble: EnsembleKind,
    #[arg(long, default_value_t = 4.0)]
    pub d: f64,
    /// Degree distribution for Chung-Lu.
    #[arg(long, default_value = "4:0.6666666666666666,9:0.3333333333333333")]
    pub dist: String,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub p: usize,
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
    #[arg(long, default_value_t = 200)]
    pub restarts: usize,
    #[arg(long, default_value_t = 300)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Guessed angles; default is the SK optimum rescaled by the mean degree.
    #[arg(long)]
    pub guess: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct LandscapeArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub arity: usize,
    /// Base angles for p > 1; the grid varies layer --layer.
    #[arg(long)]
    pub angles: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub layer: usize,
    #[arg(long, default_value_t = -std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
    pub beta_min: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
    pub beta_max: f64,
    #[arg(long, default_value_t = 61)]
    pub beta_steps: usize,
    #[arg(long, default_value_t = -std::f64::consts::PI, allow_hyphen_values = true)]
    pub gamma_min: f64,
    #[arg(long, default_value_t = std::f64::consts::PI, allow_hyphen_values = true)]
    pub gamma_max: f64,
    #[arg(long, default_value_t = 121)]
    pub gamma_steps: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
