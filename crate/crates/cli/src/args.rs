//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "fluxdec", version, about = "Force decompositions, flows and sampling for mean-field jump processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the invariant battery on a model; exit 1 if any check fails.
    Verify(VerifyArgs),
    /// Integrate one flow and write the trajectory with its monitors.
    Flow(FlowArgs),
    /// Direction fields and arcs of the full, symmetric and antisymmetric flows on a 3-state simplex.
    Phase(PhaseArgs),
    /// Law-of-large-numbers sampling campaign.
    Sample(SampleArgs),
    /// Write the bundled reference models as JSON files.
    Fixtures(FixturesArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Seed for the random evaluation points.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Base tolerance of the identity checks.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5, 0.75, 1.0])]
    pub lambda: Vec<f64>,
    /// Number of random interior points.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Full,
    Sym,
    Asym,
    Tilted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TiltArg {
    Force,
    Sym,
    Asym,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::Full)]
    pub kind: KindArg,
    /// Tilt parameter of the tilted flow.
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Field `G` of the tilted flow.
    #[arg(long, value_enum, default_value_t = TiltArg::Sym)]
    pub tilt_field: TiltArg,
    #[arg(long, default_value_t = 10.0)]
    pub t_final: f64,
    /// Relative tolerance; the absolute tolerance is 1e-2 times this.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Output spacing; every accepted step is written when absent.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub rho0: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Barycentric grid resolution.
    #[arg(long, default_value_t = 10)]
    pub grid: usize,
    #[arg(long, default_value_t = 20.0)]
    pub t_final: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Output spacing along arcs.
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Model file; the two-state reference chain when absent.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [100_u64, 1000, 10000])]
    pub n: Vec<u64>,
    #[arg(long, default_value_t = 64)]
    pub replicas: usize,
    #[arg(long, default_value_t = 2.0)]
    pub t_final: f64,
    #[arg(long, value_delimiter = ',')]
    pub rho0: Option<Vec<f64>>,
    /// Per-edge tilt applied to the jump rates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub tilt: Option<Vec<f64>>,
    /// Stats CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Checkpointed paths of every replica at the largest n.
    #[arg(long)]
    pub paths: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixturesArgs {
    /// Directory receiving one JSON file per model.
    #[arg(long)]
    pub out: PathBuf,
}
