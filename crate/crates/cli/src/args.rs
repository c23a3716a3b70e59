use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "cgo", version, about = "CGO solutions of the d-bar system for the disk potential")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the CGO system numerically and write both grids.
    Solve(SolveArgs),
    /// Evaluate the zone asymptotics on the solver grids.
    Asym(AsymArgs),
    /// Tabulate the G profiles on a rectangle.
    Gfun(GfunArgs),
    /// Compare solver fields with the asymptotics over a list of k.
    Compare(CompareArgs),
    /// Sweep the reflection coefficient over an interval of k.
    Reflect(ReflectArgs),
    /// Fit the decay exponent of the K² action on the constant field.
    ProbeK2(ProbeArgs),
}

/// Options shared by every command.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct Common {
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Flat `key = value` file whose entries act as default flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GridArgs {
    /// Radial nodes (default: chosen from |k|).
    #[arg(long)]
    pub nr: Option<usize>,
    /// Angular nodes (default: chosen from |k|).
    #[arg(long)]
    pub nphi: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1.0)]
    pub relaxation: f64,
    #[arg(long, value_enum, default_value_t = FallbackArg::Gmres)]
    pub fallback: FallbackArg,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct AsymArgsCommon {
    /// Radius factor of the stationary-point discs.
    #[arg(long = "C", default_value_t = 4.0, allow_hyphen_values = true)]
    #[serde(rename = "C")]
    pub c: f64,
    #[arg(long = "delta-scale", default_value_t = 1.0)]
    pub delta_scale: f64,
    #[arg(long = "rk-scale", default_value_t = 1.0)]
    pub rk_scale: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub g: GQuadArgs,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GQuadArgs {
    /// Half period of the G quadrature, in units of π.
    #[arg(long = "g-l", default_value_t = 10.0)]
    pub g_l: f64,
    /// Trapezoid nodes of the G quadrature.
    #[arg(long = "g-n", default_value_t = 512)]
    pub g_n: usize,
    /// Distance between the G contour and its pole.
    #[arg(long = "g-offset", default_value_t = 1.5)]
    pub g_offset: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FallbackArg {
    Gmres,
    None,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialArg {
    Disk,
    Zero,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgainstArg {
    /// Zone-dispatched formulas.
    Asym,
    /// Case I formulas everywhere.
    Case1,
    /// First Neumann term.
    Tilde,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SolveArgs {
    /// Real part of k.
    #[arg(long, allow_hyphen_values = true)]
    pub k: f64,
    /// Imaginary part of k.
    #[arg(long = "k-im", default_value_t = 0.0, allow_hyphen_values = true)]
    pub k_im: f64,
    #[arg(long, value_enum, default_value_t = PotentialArg::Disk)]
    pub q: PotentialArg,
    /// Sign in the second equation (±1).
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub sigma: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct AsymArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub k: f64,
    #[arg(long = "k-im", default_value_t = 0.0, allow_hyphen_values = true)]
    pub k_im: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub asym: AsymArgsCommon,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// Samples per zone boundary for the mismatch report.
    #[arg(long = "boundary-samples", default_value_t = 64)]
    pub boundary_samples: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GfunArgs {
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub xmin: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub xmax: f64,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub ymin: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub ymax: f64,
    #[arg(long, default_value_t = 61)]
    pub nx: usize,
    #[arg(long, default_value_t = 61)]
    pub ny: usize,
    /// Also report the change under doubling of the node count.
    #[arg(long)]
    pub refine: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub g: GQuadArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CompareArgs {
    /// Comma-separated list of k.
    #[arg(long, value_delimiter = ',', default_value = "25,50,100,200")]
    pub k: Vec<f64>,
    /// Comma-separated list of disc radius factors.
    #[arg(long = "C", value_delimiter = ',', default_value = "4")]
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    #[arg(long, value_enum, default_value_t = AgainstArg::Asym)]
    pub against: AgainstArg,
    #[arg(long = "delta-scale", default_value_t = 1.0)]
    pub delta_scale: f64,
    #[arg(long = "rk-scale", default_value_t = 1.0)]
    pub rk_scale: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub g: GQuadArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReflectArgs {
    #[arg(long, default_value_t = 10.0)]
    pub kmin: f64,
    #[arg(long, default_value_t = 100.0)]
    pub kmax: f64,
    #[arg(long, default_value_t = 46)]
    pub count: usize,
    /// Numerical values for k ≤ kc; 0 gives an asymptotics-only sweep.
    #[arg(long, default_value_t = 100.0)]
    pub kc: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ProbeArgs {
    #[arg(long, value_delimiter = ',', default_value = "25,50,100,200")]
    pub k: Vec<f64>,
    #[arg(long, value_enum, default_value_t = PotentialArg::Disk)]
    pub q: PotentialArg,
    /// Accepted exponent window.
    #[arg(long = "window-lo", default_value_t = -0.65, allow_hyphen_values = true)]
    pub window_lo: f64,
    #[arg(long = "window-hi", default_value_t = -0.35, allow_hyphen_values = true)]
    pub window_hi: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}
