use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lsgd_core::SigmaSchedule;

#[derive(Debug, Parser)]
#[command(
    name = "lsgd",
    version,
    about = "Gradient descent with Laplacian smoothing: solvers, optimizer runs, saddle analysis and polar sweeps",
    args_override_self = true
)]
pub struct Cli {
    /// TOML file whose keys (long flag names) override the command-line flags.
    /// Keys may sit at the top level or in a table named after the subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve (I - sigma L) x = y for the periodic 1-D Laplacian L
    Smooth(SmoothArgs),
    /// Run gradient descent or (modified) Laplacian smoothing gradient descent
    Optimize(OptimizeArgs),
    /// Eigenstructure of the smoothed Hessian and the attraction subspace W
    Analyze(AnalyzeArgs),
    /// Two-scale polar sweep of final distances to the saddle (2-D problems)
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Spectral solve through the discrete Fourier transform
    Dft,
    /// Cyclic tridiagonal sweep with a rank-one corner correction
    Thomas,
    /// Dense Gaussian elimination (reference)
    Dense,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct SmoothArgs {
    /// Problem dimension (at least 2)
    #[arg(long)]
    pub n: usize,
    /// Smoothing strength (>= 0)
    #[arg(long)]
    pub sigma: f64,
    /// Right-hand side: one number per line, n lines
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Solver used for the inverse
    #[arg(long, value_enum, default_value_t = Method::Thomas)]
    pub method: Method,
}

/// Quadratic `f(x) = (c/2) xᵀBx`, either canonical or read from a matrix file.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    Canonical,
    File(PathBuf),
}

fn parse_objective(s: &str) -> Result<ObjectiveSpec, String> {
    match s {
        "" => Err("expected 'canonical' or a matrix file path".to_string()),
        "canonical" => Ok(ObjectiveSpec::Canonical),
        path => Ok(ObjectiveSpec::File(PathBuf::from(path))),
    }
}

fn parse_schedule(s: &str) -> Result<SigmaSchedule, String> {
    s.parse().map_err(|e: lsgd_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct ObjectiveArgs {
    /// 'canonical' for B = diag(1, ..., 1, -1), or a matrix file (first line n, then n rows)
    #[arg(long, value_name = "canonical|FILE", value_parser = parse_objective)]
    pub objective: ObjectiveSpec,
    /// Dimension of the canonical objective (ignored for matrix files)
    #[arg(long)]
    pub n: Option<usize>,
    /// Positive scale c in f(x) = (c/2) x^T B x
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    /// Starting point: one number per line
    #[arg(long, value_name = "FILE")]
    pub x0: PathBuf,
    /// Step size
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Maximum number of iterations
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    /// Stop once the gradient norm is at most this value
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// Stop once the iterate leaves the ball of this radius ('inf' disables)
    #[arg(long, default_value_t = 1e3)]
    pub escape_radius: f64,
    /// Smoothing schedule: gd, constant:<sigma>, ratio, ratio:<offset> or plateau:<k0>
    #[arg(long, default_value = "gd", value_parser = parse_schedule)]
    pub schedule: SigmaSchedule,
    /// Write the iterates as CSV with columns k,x_0,...,x_{n-1},grad_norm
    #[arg(long, value_name = "FILE")]
    pub trajectory: Option<PathBuf>,
    /// Write the JSON result here instead of standard output
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    /// Comma-separated smoothing strengths to analyse
    #[arg(long, value_delimiter = ',', default_value = "0.1,1,5,50")]
    pub sigma_list: Vec<f64>,
    /// Write the JSON report here instead of standard output
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleChoice {
    /// f(x) = x1^2 - x2^2
    #[value(name = "1")]
    One,
    /// f(x) = x1^2 + 6 x1 x2 + 2 x2^2
    #[value(name = "2")]
    Two,
    /// 2x2 matrix from --matrix with scale --c
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerChoice {
    Gd,
    Mlsgd,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct SweepArgs {
    /// Problem to sweep
    #[arg(long, value_enum)]
    pub example: ExampleChoice,
    /// Matrix file for --example custom
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,
    /// Scale c for --example custom
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Plain gradient descent or gradient descent with a smoothing schedule
    #[arg(long, value_enum, default_value_t = OptimizerChoice::Mlsgd)]
    pub optimizer: OptimizerChoice,
    /// Schedule for mlsgd (default: sigma(k) = k/(k+1) counting iterations from 1)
    #[arg(long, value_parser = parse_schedule)]
    pub schedule: Option<SigmaSchedule>,
    /// Step size
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Iterations per cell
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    /// Smallest radius
    #[arg(long, default_value_t = 0.1)]
    pub r_min: f64,
    /// Largest radius (inclusive)
    #[arg(long, default_value_t = 1.0)]
    pub r_max: f64,
    /// Radius spacing
    #[arg(long, default_value_t = 0.1)]
    pub r_step: f64,
    /// Angular step of the coarse sweep over [-180, 180) degrees
    #[arg(long, default_value_t = 1e-3)]
    pub coarse_theta_step: f64,
    /// Angular step of the fine sweep around the coarse minimum (degrees)
    #[arg(long, default_value_t = 1e-5)]
    pub fine_theta_step: f64,
    /// Half-width of the fine sweep (degrees)
    #[arg(long, default_value_t = 1.0)]
    pub refine_halfwidth: f64,
    /// CSV output of the fine field
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// CSV output of the coarse field (large at the default resolution)
    #[arg(long, value_name = "FILE")]
    pub coarse_out: Option<PathBuf>,
    /// JSON summary (min_distance, argmin_r, argmin_theta_deg, max_distance, failed_cells)
    #[arg(long, value_name = "FILE")]
    pub summary: Option<PathBuf>,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    pub threads: Option<usize>,
}
