use std::path::PathBuf;

use clap::{ArgAction, ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "darboux",
    version,
    about = "Darboux displacements, Backlund chains and spectral probes for Lame potentials"
)]
pub struct Cli {
    /// key=value defaults; flags on the command line take precedence
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a kernel function at a point or along a grid
    #[command(args_override_self = true)]
    Elliptic(EllipticArgs),
    /// Run the residual suites and report the worst offender
    #[command(args_override_self = true)]
    Verify(VerifyArgs),
    /// Tabulate a displacement superpotential and its partner
    #[command(args_override_self = true)]
    Displace(DisplaceArgs),
    /// Build a Backlund chain potential
    #[command(args_override_self = true)]
    Chain(ChainArgs),
    /// Band edges and bound states of a sampled potential
    #[command(args_override_self = true)]
    Spectrum(SpectrumArgs),
    /// End-to-end defect constructions
    #[command(args_override_self = true)]
    Figure(FigureArgs),
}

/// A finite decimal number.
pub fn decimal(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|e| format!("{s:?} is not a decimal number: {e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

pub fn positive(s: &str) -> Result<f64, String> {
    let v = decimal(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{s} must be positive"))
    }
}

/// Comma-separated decimals.
#[derive(Debug, Clone, PartialEq)]
pub struct List(pub Vec<f64>);

pub fn list(s: &str) -> Result<List, String> {
    let items = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(decimal)
        .collect::<Result<Vec<_>, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(List(items))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Func {
    Wp,
    Wpp,
    Zeta,
    Sigma,
    Sn,
    Cn,
    Dn,
    /// `m sn²(x|m) - (m+1)/3`
    Lame,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("at").required(true).args(["re", "grid", "period_grid"])))]
pub struct EllipticArgs {
    #[arg(long, value_parser = decimal, allow_hyphen_values = true)]
    pub m: f64,
    #[arg(long = "fn", value_enum)]
    pub func: Func,
    #[arg(long, value_parser = decimal, allow_hyphen_values = true)]
    pub re: Option<f64>,
    /// imaginary part of the point, or of the whole grid line
    #[arg(long, value_parser = decimal, allow_hyphen_values = true, default_value = "0")]
    pub im: f64,
    #[arg(long, num_args = 3, value_names = ["XMIN", "XMAX", "N"], value_parser = decimal,
          allow_hyphen_values = true, action = ArgAction::Set)]
    pub grid: Option<Vec<f64>>,
    /// grid over `[0, P T]` with `N` points, `T` the real period
    #[arg(long, num_args = 2, value_names = ["P", "N"], value_parser = decimal, action = ArgAction::Set)]
    pub period_grid: Option<Vec<f64>>,
    /// CSV destination (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PotentialKind {
    Lame,
    /// `V = x²`; fails the displacement criterion
    Harmonic,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = decimal, default_value = "0.5")]
    pub m: f64,
    #[arg(long, value_parser = list, default_value = "0.3,0.7,1.1", allow_hyphen_values = true)]
    pub deltas: List,
    #[arg(long, value_enum, default_value_t = PotentialKind::Lame)]
    pub potential: PotentialKind,
    /// also compare against the golden-vector file named by DARBOUX_GOLDEN
    #[arg(long)]
    pub golden: bool,
    #[arg(long, value_parser = positive, default_value = "1e-8")]
    pub tol_addition: f64,
    #[arg(long, value_parser = positive, default_value = "1e-8")]
    pub tol_displacement: f64,
    #[arg(long, value_parser = positive, default_value = "1e-7")]
    pub tol_riccati: f64,
    #[arg(long, value_parser = positive, default_value = "1e-6")]
    pub tol_intertwining: f64,
    #[arg(long, value_parser = positive, default_value = "1e-12")]
    pub tol_golden: f64,
    /// JSON report destination
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["delta", "eps"])))]
pub struct DisplaceArgs {
    #[arg(long, value_parser = decimal, default_value = "0.5")]
    pub m: f64,
    #[arg(long, value_parser = decimal, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long, value_parser = decimal, allow_hyphen_values = true, default_value = "0", requires = "delta")]
    pub delta_im: f64,
    /// factorization energy; `δ` is solved from it
    #[arg(long, value_parser = decimal, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    /// mixing parameter of the general solution
    #[arg(long, value_parser = decimal, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, num_args = 3, value_names = ["XMIN", "XMAX", "N"], value_parser = decimal,
          allow_hyphen_values = true, action = ArgAction::Set, default_values = ["-10", "10", "801"])]
    pub grid: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[arg(long, value_parser = decimal, default_value = "0.5")]
    pub m: f64,
    /// stage energies
    #[arg(long, value_parser = list, allow_hyphen_values = true)]
    pub eps: List,
    /// one `Γ` per stage; displacement stages when absent
    #[arg(long, value_parser = list, allow_hyphen_values = true)]
    pub gamma: Option<List>,
    #[arg(long, num_args = 3, value_names = ["XMIN", "XMAX", "N"], value_parser = decimal,
          allow_hyphen_values = true, action = ArgAction::Set, default_values = ["-20", "20", "2001"])]
    pub grid: Vec<f64>,
    /// largest accepted stage Riccati residual
    #[arg(long, value_parser = positive, default_value = "1e-6")]
    pub tol_stage: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryKind {
    Floquet,
    Dirichlet,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// CSV with `x` in the first column
    #[arg(long)]
    pub input: PathBuf,
    /// header of the potential column (second column by default)
    #[arg(long)]
    pub column: Option<String>,
    /// period of the samples; the sampled span when absent
    #[arg(long, value_parser = positive)]
    pub period: Option<f64>,
    /// number of band edges to report
    #[arg(long)]
    pub bands: Option<usize>,
    /// energy range for band edges; grown from the potential's range when absent
    #[arg(long, num_args = 2, value_names = ["EMIN", "EMAX"], value_parser = decimal,
          allow_hyphen_values = true, action = ArgAction::Set)]
    pub range: Option<Vec<f64>>,
    /// bisection tolerance for band edges
    #[arg(long, value_parser = positive, default_value = "1e-10")]
    pub tol: f64,
    /// energies scanned for sign changes
    #[arg(long, default_value_t = 400)]
    pub scan: usize,
    /// discriminant samples over the edge range
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    /// energy window for bound states of a truncated potential
    #[arg(long, num_args = 2, value_names = ["EMIN", "EMAX"], value_parser = decimal,
          allow_hyphen_values = true, action = ArgAction::Set)]
    pub window: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = BoundaryKind::Floquet)]
    pub boundary: BoundaryKind,
    /// boundary cell length for Floquet conditions
    #[arg(long, value_parser = positive)]
    pub cell: Option<f64>,
    /// bisection tolerance for bound-state energies
    #[arg(long, value_parser = positive, default_value = "1e-12")]
    pub level_tol: f64,
    /// largest accepted matching residual
    #[arg(long, value_parser = positive, default_value = "1e-6")]
    pub residual_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    /// one level below the ground band
    Fig1,
    /// two levels inside the first gap
    Fig2,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub which: Which,
    #[arg(long, value_parser = decimal, default_value = "0.5")]
    pub m: f64,
    #[arg(long, value_parser = list, allow_hyphen_values = true)]
    pub eps: List,
    /// fixed mixing parameters; searched when absent
    #[arg(long, value_parser = list, allow_hyphen_values = true)]
    pub gamma: Option<List>,
    #[arg(long, default_value_t = 8)]
    pub periods: usize,
    #[arg(long, default_value_t = 1)]
    pub window_periods: usize,
    #[arg(long, default_value_t = 400)]
    pub points_per_period: usize,
    /// largest accepted distance of a bound state from its target energy
    #[arg(long, value_parser = positive, default_value = "1e-3")]
    pub tol_level: f64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// also render an SVG next to the CSV
    #[arg(long)]
    pub plot: bool,
}
