use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hardy_core::quadrature::QuadConfig;
use hardy_core::Branch;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "hardy-lab", version, about = "Numerical checks of weighted Hardy-type inequalities")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalOpts {
    /// Relative quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub abs_tol: f64,
    /// Subdivision budget per integral.
    #[arg(long, global = true, default_value_t = 2000)]
    pub max_subdiv: usize,
    /// Fixed timestamp so seeded reruns are byte-identical.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

impl GlobalOpts {
    pub fn quad(&self) -> QuadConfig {
        QuadConfig { rel_tol: self.rel_tol, abs_tol: self.abs_tol, max_subdivisions: self.max_subdiv, ..QuadConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchArg {
    Minus,
    Plus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Minus => Branch::Minus,
            BranchArg::Plus => Branch::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotonicityArg {
    Decreasing,
    Increasing,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Muckenhoupt constant and C0 bracket for the power weights v = x^(alpha-p), w = x^alpha.
    Constant(ConstantArgs),
    /// Muckenhoupt constant for weights given as JSON, or for a monotone pair.
    Muckenhoupt(MuckenhouptArgs),
    /// Both sides of a scalar inequality; grids give a CSV sweep.
    Verify(VerifyArgs),
    /// Ratio ladder along the extremal family.
    Sharpness(SharpnessArgs),
    /// The ad hoc inequality for a monotone pair (w1, w2).
    CheckAdhoc(AdhocArgs),
    /// Matrix-valued check on a step path read from JSON.
    Opcheck(OpcheckArgs),
    /// Randomized search for Loewner-order violations.
    Counterexample(CounterexampleArgs),
    /// Cartesian sweep from a JSON config.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    Power,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConstantArgs {
    #[arg(long, value_enum, default_value = "power")]
    pub kind: ConstantKind,
    #[arg(long)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, value_enum)]
    pub direction: BranchArg,
    /// Right endpoint of (0, b).
    #[arg(long, default_value_t = f64::INFINITY)]
    pub b: f64,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MuckenhouptArgs {
    /// Outer weight v as a JSON weight spec.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "w1")]
    pub v: Option<String>,
    /// Inner weight w as a JSON weight spec.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "w1")]
    pub w: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub psi: Option<String>,
    /// Monotone weight w1 (pair mode, with --w2 and --monotonicity).
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["v", "w", "phi", "psi"], requires_all = ["w2", "monotonicity"])]
    pub w1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub w2: Option<String>,
    #[arg(long, value_enum)]
    pub monotonicity: Option<MonotonicityArg>,
    #[arg(long)]
    pub p: f64,
    /// Branch; in pair mode it follows from --monotonicity.
    #[arg(long, value_enum, required_unless_present = "w1")]
    pub direction: Option<BranchArg>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// power-minus, power-plus, iterated, diff-form or birman-chain.
    #[arg(long)]
    pub ineq: String,
    #[arg(long, required_unless_present = "p_grid")]
    pub p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha_grid: Option<Vec<f64>>,
    /// Branch of the iterated inequality.
    #[arg(long, value_enum, default_value = "minus")]
    pub branch: BranchArg,
    /// Order of the iterated operator.
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = f64::INFINITY)]
    pub b: f64,
    /// exp, poly-exp, step, bump or extremal.
    #[arg(long, default_value = "exp")]
    pub family: String,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Output path of the sweep CSV; stdout when absent.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SharpnessArgs {
    #[arg(long, value_enum)]
    pub branch: BranchArg,
    #[arg(long)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.1, 0.05, 0.02, 0.01])]
    pub eps: Vec<f64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AdhocArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub w1: String,
    #[arg(long, value_enum)]
    pub monotonicity: MonotonicityArg,
    #[arg(long, allow_hyphen_values = true)]
    pub w2: String,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value = "exp")]
    pub family: String,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OpCheckKind {
    Operator,
    Trace,
    Hansen,
    Iterated,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OpcheckArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub alpha: f64,
    /// Expected matrix dimension of the path.
    #[arg(long)]
    pub dim: Option<usize>,
    /// JSON file with the step path: grid and row-major matrices.
    #[arg(long)]
    pub steps: PathBuf,
    #[arg(long, value_enum, default_value = "operator")]
    pub check: OpCheckKind,
    #[arg(long, value_enum, default_value = "minus")]
    pub branch: BranchArg,
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    /// Right endpoint for the trace check.
    #[arg(long, default_value_t = f64::INFINITY)]
    pub b: f64,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CounterexampleArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Number of steps per candidate path.
    #[arg(long, default_value_t = 2)]
    pub n_steps: usize,
    #[arg(long, default_value_t = 50)]
    pub restart_len: usize,
    #[arg(long, value_enum, default_value = "minus")]
    pub branch: BranchArg,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// JSON config with schema "hardy-lab/v1".
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}
