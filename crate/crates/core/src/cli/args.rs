use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "sbigof",
    version,
    about = "Likelihood-free goodness-of-fit tests for simulation-based models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pre-inference test of observations against one or more reference tables.
    Prior(PriorArgs),
    /// Prior test against a re-simulated neighborhood of each observation.
    PriorLocal(PriorLocalArgs),
    /// Post-inference holdout test over a grid of posterior approximations.
    Holdout(HoldoutArgs),
    /// Power of the prior or holdout test against an alternative model.
    Power(PowerArgs),
    /// Distribution of p-values when the null model is true.
    Calibration(CalibrationArgs),
    /// Benjamini-Hochberg adjustment across saved reports.
    Bh(BhArgs),
    /// Write a reference table simulated from a built-in toy model.
    Simulate(SimulateArgs),
}

/// Options shared by every command.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct RunArgs {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism). Results do not
    /// depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct TableArgs {
    /// Reference table, as `PATH` or `NAME=PATH`. Repeat for several
    /// scenarios.
    #[arg(long)]
    pub reference: Vec<String>,
    /// JSON column schema for files without `param:`/`stat:` headers.
    #[arg(long)]
    pub schema: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreArgs {
    /// knn, lof or maxlof, or a full label such as `knn[3]` or
    /// `maxlof[5,20]`. Repeatable.
    #[arg(long)]
    pub score: Vec<String>,
    /// Neighborhood size for knn and lof.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub k_min: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Rescale summaries by the reference set's mean and sd before scoring.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiKind {
    Asymptotic,
    Bootstrap,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct CiArgs {
    #[arg(long, value_enum)]
    pub ci: Option<CiKind>,
    /// Bootstrap re-splits.
    #[arg(long)]
    pub n_boot: Option<usize>,
    /// Interval level.
    #[arg(long)]
    pub level: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Rejection,
    Loclin,
    Ridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResimKind {
    ToyLaplace,
    ToyGaussian,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ResimArgs {
    /// Built-in simulator used to re-simulate posterior particles.
    #[arg(long, value_enum)]
    pub resimulator: Option<ResimKind>,
    /// Write the parameters to re-simulate as `params_*.csv` and stop.
    #[arg(long)]
    pub export_params: bool,
    /// Read externally simulated `summaries_*.csv` from this directory.
    #[arg(long)]
    pub import_summaries: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub table: TableArgs,
    /// Observed summaries, one observation per row.
    #[arg(long)]
    pub observed: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub score: ScoreArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub ci: CiArgs,
    /// Calibration rows taken from each table (default: half).
    #[arg(long)]
    pub n_calib: Option<usize>,
    /// Use only the first N rows, split evenly. Repeatable.
    #[arg(long)]
    pub budget: Vec<usize>,
    /// Benjamini-Hochberg adjustment across scenarios.
    #[arg(long)]
    pub bh: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorLocalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub table: TableArgs,
    #[arg(long)]
    pub observed: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub score: ScoreArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub ci: CiArgs,
    /// Rows kept around the observation. Repeatable.
    #[arg(long)]
    pub n_post: Vec<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub resim: ResimArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct HoldoutArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub table: TableArgs,
    /// Summaries used for inference, one dataset per row.
    #[arg(long)]
    pub observed: Option<PathBuf>,
    /// Held-out summaries, row-aligned with `--observed`.
    #[arg(long)]
    pub new: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub score: ScoreArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub ci: CiArgs,
    /// Posterior sample size. Repeatable.
    #[arg(long)]
    pub n_post: Vec<usize>,
    /// Posterior approximation. Repeatable.
    #[arg(long, value_enum)]
    pub method: Vec<MethodKind>,
    /// Ridge penalty. Repeatable.
    #[arg(long)]
    pub lambda: Vec<f64>,
    /// JSON parameter bounds for regression adjustment.
    #[arg(long)]
    pub transform: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub resim: ResimArgs,
    /// Also test with the roles of the two datasets swapped.
    #[arg(long)]
    pub symmetric: bool,
    /// Benjamini-Hochberg adjustment across scenarios.
    #[arg(long)]
    pub bh: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerTest {
    Prior,
    Holdout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalibrationKind {
    /// PODs share one reference/calibration table per budget.
    Prior,
    /// Each POD gets its own table.
    PriorFresh,
    Holdout,
}

/// Toy model and posterior options shared by `power` and `calibration`.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyArgs {
    /// Total simulations (prior test) or reference size (holdout test).
    /// Repeatable.
    #[arg(long)]
    pub budget: Vec<usize>,
    /// Number of PODs.
    #[arg(long)]
    pub n_test: Option<usize>,
    /// Test level.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Score every knn[k] and lof[k] for these k. Repeatable.
    #[arg(long)]
    pub k_sweep: Vec<usize>,
    /// Raw sample length of the toy models.
    #[arg(long)]
    pub d: Option<usize>,
    /// Number of L-moment summaries of the toy models.
    #[arg(long)]
    pub m: Option<usize>,
    /// Posterior sample size for the holdout test.
    #[arg(long)]
    pub n_post: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<MethodKind>,
    /// Ridge penalty. Repeatable.
    #[arg(long)]
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    /// Null model: toy-laplace, toy-gaussian or a table path.
    #[arg(long)]
    pub null: Option<String>,
    /// Alternative model: toy-laplace, toy-gaussian or a table path.
    #[arg(long)]
    pub alt: Option<String>,
    /// Held-out rows aligned with a table `--alt` (holdout test).
    #[arg(long)]
    pub alt_new: Option<String>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub test: Option<PowerTest>,
    #[command(flatten)]
    #[serde(flatten)]
    pub study: StudyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub score: ScoreArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    /// Null model: toy-laplace or toy-gaussian.
    #[arg(long)]
    pub null: Option<String>,
    #[arg(long, value_enum)]
    pub test: Option<CalibrationKind>,
    #[command(flatten)]
    #[serde(flatten)]
    pub study: StudyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub score: ScoreArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct BhArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    /// reports.json files to adjust together.
    #[arg(long)]
    pub reports: Vec<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    /// toy-laplace or toy-gaussian.
    #[arg(long)]
    pub model: Option<String>,
    /// Number of rows.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
}
