//! Command-line flags. Every flag is optional and overrides the matching
//! config-file key.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Format;

#[derive(Debug, Parser)]
#[command(name = "qpf", version, about = "Diagnostics for quasiperiodically forced circle maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fibered rotation number.
    Rho(RhoArgs),
    /// Strict monotonicity vs. mode-locking under vertical perturbation.
    Probe(ProbeArgs),
    /// Deviations from rigid rotation along one orbit.
    Deviations(DeviationsArgs),
    /// 1-D or 2-D parameter sweep with plateau detection.
    Sweep(SweepArgs),
    /// Bisection for a tongue edge.
    Tongue(TongueArgs),
    /// Invariant strip from curve iteration above and below.
    Strip(StripArgs),
    /// Annulus mapped into its own interior.
    Annulus(AnnulusArgs),
    /// Harper energy scan: rotation number against integrated density of states.
    Ids(IdsArgs),
    /// Gap label of a Harper energy interval.
    GapLabel(GapLabelArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Rho(_) => "rho",
            Command::Probe(_) => "probe",
            Command::Deviations(_) => "deviations",
            Command::Sweep(_) => "sweep",
            Command::Tongue(_) => "tongue",
            Command::Strip(_) => "strip",
            Command::Annulus(_) => "annulus",
            Command::Ids(_) => "ids",
            Command::GapLabel(_) => "gap-label",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Rho(a) => &a.common,
            Command::Probe(a) => &a.common,
            Command::Deviations(a) => &a.common,
            Command::Sweep(a) => &a.common,
            Command::Tongue(a) => &a.common,
            Command::Strip(a) => &a.common,
            Command::Annulus(a) => &a.common,
            Command::Ids(a) => &a.common,
            Command::GapLabel(a) => &a.common,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Plain,
    Weighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EdgeArg {
    Left,
    Right,
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Seed for the estimator's random starting points.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "QPF_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,

    /// translation, arnold or harper; resets family parameters to zero.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub rho0: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Almost-Mathieu coupling: V(θ) = 2λ cos 2πθ.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub energy: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,

    /// Iterates per seed.
    #[arg(long)]
    pub n: Option<u64>,
    /// Number of seed orbits.
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub transient: Option<u64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct RhoArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Symmetric ε grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct DeviationsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub x: Option<f64>,
    /// Iterate counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<u64>>,
    /// Rotation number to subtract; estimated when absent.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Also run the boundedness diagnostic up to this many iterates.
    #[arg(long)]
    pub n_max: Option<u64>,
    #[arg(long)]
    pub growth_window: Option<usize>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long)]
    pub lo: Option<f64>,
    #[arg(long)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Second axis; makes the sweep two-dimensional.
    #[arg(long)]
    pub param2: Option<String>,
    #[arg(long)]
    pub lo2: Option<f64>,
    #[arg(long)]
    pub hi2: Option<f64>,
    #[arg(long)]
    pub points2: Option<usize>,
    /// Vertical shift applied to every lift.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub min_width: Option<f64>,
    #[arg(long)]
    pub witness_tol: Option<f64>,
    #[arg(long)]
    pub qmax: Option<u32>,
    #[arg(long)]
    pub pmax: Option<u32>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TongueArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long)]
    pub lo: Option<f64>,
    #[arg(long)]
    pub hi: Option<f64>,
    #[arg(long, value_enum)]
    pub edge: Option<EdgeArg>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct StripArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub below: Option<f64>,
    #[arg(long)]
    pub above: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub radius: Option<usize>,
    #[arg(long)]
    pub pinch_tol: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct AnnulusArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub candidates: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub strict_tol: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct IdsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub e_lo: Option<f64>,
    #[arg(long)]
    pub e_hi: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Truncation size N.
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub phases: Option<usize>,
    #[arg(long)]
    pub label_tol: Option<f64>,
    #[arg(long)]
    pub kmax: Option<i64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct GapLabelArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub e_lo: Option<f64>,
    #[arg(long)]
    pub e_hi: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub kmax: Option<i64>,
}
