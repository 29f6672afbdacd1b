use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "xqr", version, about = "Variational quantum linear regression toolkit")]
pub struct Cli {
    /// Directory for every file a command writes.
    #[arg(long, global = true, env = "XQR_OUTPUT_DIR", default_value = ".")]
    pub output: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic linear table as CSV.
    Generate(GenerateArgs),
    /// Fit one model to a CSV table.
    Fit(FitArgs),
    /// Bootstrap ensemble of fits with standard errors and t-statistics.
    Ensemble(EnsembleArgs),
    /// Fit sin(x) with fifteen power features and an L1 penalty.
    SinDemo(SinDemoArgs),
    /// Cost estimates against readout error for both encodings.
    NoiseSweep(NoiseSweepArgs),
    /// Coverage of Pauli-shadow estimates of the compact cost.
    ShadowStudy(ShadowStudyArgs),
    /// Qubit, gate and shot-cost tables.
    Resources(ResourcesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendArg {
    Analytic,
    OneHot,
    Compact,
    ShotsOneHot,
    ShotsCompact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateModelArg {
    Local,
    Global,
    Compiled,
    All,
}

/// Table source shared by the circuit studies: a CSV file or a seeded
/// synthetic table.
#[derive(Debug, Clone, Args, Serialize)]
pub struct TableArgs {
    /// CSV with the response in the first column.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Rows of the synthetic table when no input is given.
    #[arg(long, default_value_t = 4)]
    pub rows: usize,
    /// Features of the synthetic table when no input is given.
    #[arg(long, default_value_t = 3)]
    pub features: usize,
    /// Standardized weights defining the phases; zeros (the null model) when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub features: usize,
    /// True weights, one per feature.
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub weights: Vec<f64>,
    /// Relative Gaussian noise on each weight.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "synthetic.csv")]
    pub name: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value_t = BackendArg::Analytic)]
    pub backend: BackendArg,
    /// L1 penalty weight.
    #[arg(long, default_value_t = 0.0)]
    pub l1: f64,
    /// L2 penalty weight.
    #[arg(long, default_value_t = 0.0)]
    pub l2: f64,
    /// Shots per cost evaluation for the shot backends.
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,
    /// Readout bit-flip probability for the shot backends.
    #[arg(long, default_value_t = 0.0)]
    pub readout_delta: f64,
    #[arg(long, default_value_t = 20)]
    pub max_restarts: usize,
    #[arg(long, default_value_t = 1e-16)]
    pub tol_f: f64,
    /// Keep raw column scales instead of equalizing them.
    #[arg(long)]
    pub no_equalize: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EnsembleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1024)]
    pub batches: usize,
    #[arg(long, default_value_t = 60)]
    pub batch_size: usize,
    /// Seed of the bootstrap row draws.
    #[arg(long, default_value_t = 0)]
    pub bootstrap_seed: u64,
    /// Report the standard error of the mean instead of the batch spread.
    #[arg(long)]
    pub mean_error: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SinDemoArgs {
    #[arg(long, default_value_t = 1.2e-7)]
    pub alpha: f64,
    #[arg(long, default_value_t = 32)]
    pub rows: usize,
    #[arg(long, default_value_t = 15)]
    pub max_power: usize,
    #[arg(long, default_value_t = 0.1)]
    pub initial_magnitude: f64,
    #[arg(long, default_value_t = 201)]
    pub grid_points: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NoiseSweepArgs {
    #[command(flatten)]
    pub table: TableArgs,
    /// Readout error values to sweep.
    #[arg(long, value_delimiter = ',', default_value = "0,0.005,0.01,0.02,0.05")]
    pub deltas: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ShadowStudyArgs {
    #[command(flatten)]
    pub table: TableArgs,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Constant in the snapshot budget `c k ln2 4^k / epsilon^2`.
    #[arg(long, default_value_t = 16.0)]
    pub constant: f64,
    #[arg(long, default_value_t = 100)]
    pub replications: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ResourcesArgs {
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256,512,1024")]
    pub rows: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "3")]
    pub features: Vec<usize>,
    /// Digitization bits per cell.
    #[arg(long, default_value_t = 8)]
    pub bits: usize,
    #[arg(long, value_enum, default_value_t = GateModelArg::All)]
    pub gate_model: GateModelArg,
}
