use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use varprop_core::models::{Boundary, CoefficientSource, MomentumAxis, PmConvention};
use varprop_core::propagator::KpmConvention;
use varprop_core::Method;

/// Benchmarks of variational time-evolution operators and improved
/// degenerate perturbation theory.
///
/// Every command also reads a flat `key = value` file via `--config`; keys
/// are the long flag names and flags given on the command line win.
#[derive(Debug, Parser)]
#[command(name = "varprop", version)]
pub struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, env = "VARPROP_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance of each approximant to the exact propagator over a GUE ensemble.
    BenchEvolution(BenchArgs),
    /// Bilayer graphene momentum sweep: standard vs improved effective model.
    Graphene(GrapheneArgs),
    /// Hubbard chain t/U sweep: standard vs improved Heisenberg model.
    Hubbard(HubbardArgs),
    /// Render a CSV written by another command as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// `key = value` file with defaults for any flag
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Matrix dimensions, comma separated [default: 5].
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Samples per dimension [default: 100].
    #[arg(long)]
    pub samples: Option<usize>,
    /// Ensemble seed (required, here or in the config file).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Approximants, comma separated [default: taylor,kpm,variational,closed_form,residual_action].
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    /// Distances are measured against this method [default: exact].
    #[arg(long)]
    pub reference: Option<Method>,
    /// Largest normalized time t‖H‖ [default: 2].
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Grid points on [0, tmax] [default: 100].
    #[arg(long)]
    pub points: Option<usize>,
    /// ODE relative tolerance [default: 1e-10]
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// ODE absolute tolerance [default: 1e-12]
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// jacobi-anger or minus-two-j2 [default: jacobi-anger].
    #[arg(long)]
    pub kpm_convention: Option<KpmConvention>,
    /// CSV output [default: bench.csv].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional SVG plot of the mean curves.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GrapheneArgs {
    /// `key = value` file with defaults for any flag
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Interlayer coupling γ [default: 1].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Largest momentum in units of γ [default: 2].
    #[arg(long)]
    pub pmax: Option<f64>,
    /// Momenta on (0, pmax·γ] [default: 200].
    #[arg(long)]
    pub points: Option<usize>,
    /// as_printed (p± = p1 ± p2) or complex (p± = p1 ± i p2) [default: as_printed].
    #[arg(long)]
    pub convention: Option<PmConvention>,
    /// Sweep direction, p1 or p2 [default: p2].
    #[arg(long)]
    pub axis: Option<MomentumAxis>,
    /// CSV output [default: graphene.csv].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional SVG plot (log-scale mismatch).
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HubbardArgs {
    /// `key = value` file with defaults for any flag
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Chain length N [default: 5].
    #[arg(long)]
    pub sites: Option<usize>,
    /// On-site repulsion U [default: 1].
    #[arg(long)]
    pub interaction: Option<f64>,
    /// periodic or open [default: periodic].
    #[arg(long)]
    pub boundary: Option<Boundary>,
    /// Smallest t/U [default: 0.01].
    #[arg(long)]
    pub tmin: Option<f64>,
    /// Largest t/U [default: 0.5].
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Log-spaced t/U points [default: 50].
    #[arg(long)]
    pub points: Option<usize>,
    /// Source of the improved coefficients, printed or ode [default: printed].
    #[arg(long)]
    pub coeffs: Option<CoefficientSource>,
    /// Permit N = 7 (dense blocks up to 1225 states, slow).
    #[arg(long)]
    pub allow_large: bool,
    /// ODE relative tolerance [default: 1e-10]
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// ODE absolute tolerance [default: 1e-12]
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Per-level CSV output [default: hubbard.csv].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Averaged errors per t/U [default: <out>_aggregate.csv].
    #[arg(long)]
    pub aggregate_out: Option<PathBuf>,
    /// Optional SVG plot of the averaged errors.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// `key = value` file with defaults for any flag
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV written by bench-evolution, graphene or hubbard.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// SVG output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Logarithmic x axis
    #[arg(long)]
    pub log_x: bool,
    /// Logarithmic y axis
    #[arg(long)]
    pub log_y: bool,
    /// Force linear axes even where the schema defaults to log.
    #[arg(long)]
    pub linear: bool,
    /// Plot title [default: depends on the table]
    #[arg(long)]
    pub title: Option<String>,
}
