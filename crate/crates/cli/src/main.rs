//! `forrelate`: command-line driver for the forrelation estimators.

mod commands;
mod pool;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "forrelate", version, about = "Classical forrelation, k-fold forrelation and QAOA estimators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Oracle-based forrelation Φ(f, g) of two ±1 functions.
    Oracle(OracleArgs),
    /// k-fold forrelation via query-circuit simulation.
    Kfold(KfoldArgs),
    /// Graph-based forrelation ⟨β|α⟩ of two two-local functions.
    GraphPhi(GraphPhiArgs),
    /// Samples a qudit system with diagonal gates.
    Tnsample(TnsampleArgs),
    /// Level-2 QAOA energy of an Ising instance.
    QaoaEnergy(QaoaEnergyArgs),
    /// Recursive QAOA on an Ising instance.
    Rqaoa(RqaoaArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Master seed; every random component derives its own stream from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for independent trials (results do not depend on it).
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// CSV output path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Sweep {
    /// Comma-separated ε values; one CSV row per (ε, trial).
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Adds a wall-time column to sweep CSVs (which makes them run dependent).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub n: usize,
    /// `table:<path>`, `rand:<seed>`, `const:+1`, `const:-1` or `parity:<hex>`.
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub g: String,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Print the exact value only.
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub sweep: Sweep,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct KfoldArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// Function specs in circuit order; `--g` is appended after them.
    #[arg(long, required = true)]
    pub f: Vec<String>,
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct GraphSource {
    /// Graph file (`n`, `e u v [J]`, `rot`, `outer` lines).
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Square-lattice `RxC` graph.
    #[arg(long)]
    pub grid: Option<String>,
    /// Triangular lattice with `R` rows.
    #[arg(long)]
    pub triangular: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SamplerArg {
    Marginal,
    Linear,
}

#[derive(Args, Debug)]
pub struct GraphPhiArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Two-local function file for f (constant 1 when absent).
    #[arg(long)]
    pub f: Option<PathBuf>,
    #[arg(long)]
    pub g: Option<PathBuf>,
    /// One operator spec for all vertices or `;`-separated specs.
    #[arg(long, default_value = "H")]
    pub ops: String,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value = "marginal")]
    pub sampler: SamplerArg,
    #[arg(long)]
    pub samples_override: Option<usize>,
    /// Also print the dense exact value.
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub sweep: Sweep,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct TnsampleArgs {
    /// System file (`n`, `d`, `chi`, `op`, `gate` lines).
    pub input: PathBuf,
    /// Number of samples.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Also report exact outcome probabilities (small systems).
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    Auto,
    Statevector,
    Aprime,
    Adoubleprime,
    Forrelation,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BudgetArg {
    Total,
    PerTerm,
}

#[derive(Args, Debug, Clone)]
pub struct QaoaCommon {
    #[command(flatten)]
    pub source: GraphSource,
    /// Seconds above which the exact methods give way to forrelation.
    #[arg(long, default_value_t = 0.1)]
    pub cutoff_seconds: f64,
    /// Time a micro-benchmark to set the cost model (selection becomes
    /// machine dependent).
    #[arg(long)]
    pub calibrate: bool,
    #[arg(long, value_enum, default_value = "marginal")]
    pub sampler: SamplerArg,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
    /// Samples per forrelation instance `⌈ε⁻²⌉` instead of the Chebyshev split.
    #[arg(long)]
    pub per_instance_samples: bool,
}

#[derive(Args, Debug)]
pub struct QaoaEnergyArgs {
    #[command(flatten)]
    pub qaoa: QaoaCommon,
    /// `β₁,β₂,γ₁,γ₂`.
    #[arg(long, value_delimiter = ',', num_args = 4, default_values_t = [1.44433, 3.56786, 0.937498, 4.93861])]
    pub angles: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value = "total")]
    pub budget: BudgetArg,
    /// Also print the state-vector energy.
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub sweep: Sweep,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct RqaoaArgs {
    #[command(flatten)]
    pub qaoa: QaoaCommon,
    #[arg(long, default_value_t = 0.03)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 10)]
    pub brute_threshold: usize,
    #[arg(long, default_value_t = 30)]
    pub gamma_grid: usize,
    #[arg(long, default_value_t = 64)]
    pub level1_grid: usize,
    #[arg(long, value_enum, default_value = "per-term")]
    pub budget: BudgetArg,
    /// Assignment file; defaults to `<out>.assignment` when `--out` is set.
    #[arg(long)]
    pub assignment: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
