use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "hypermet", version, about = "Metric-geometry experiments on finite samples and grid domains")]
pub struct Cli {
    /// Seed for every sampled estimate.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Relative slack allowed for grid-based checks.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub tolerance: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Sphericalize a metric space at a base point and metrize by chains.
    Sphericalize(SphericalizeArgs),
    /// Four-point Gromov hyperbolicity constant.
    Delta(DeltaArgs),
    /// Visual metrics on a boundary chart and their comparability.
    Boundary(BoundaryArgs),
    /// Quasihyperbolic checks on a grid-discretized domain.
    Domain(DomainArgs),
    /// Doubling constant and Ahlfors-regularity fit.
    Regularity(RegularityArgs),
    /// Write the scatter of a report as CSV.
    Export(ExportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sphericalize(_) => "sphericalize",
            Command::Delta(_) => "delta",
            Command::Boundary(_) => "boundary",
            Command::Domain(_) => "domain",
            Command::Regularity(_) => "regularity",
            Command::Export(_) => "export",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SphericalizeArgs {
    /// Metric space as JSON or CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub base: String,
    /// Report path; standard output when absent.
    #[arg(long, alias = "report")]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct DeltaArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Base point; the first label when absent.
    #[arg(long, conflicts_with = "sup_base")]
    pub base: Option<String>,
    /// Maximize over every base point.
    #[arg(long)]
    pub sup_base: bool,
    #[arg(long, alias = "output")]
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("source").required(true).args(["chart", "tree_depth"])))]
pub struct BoundaryArgs {
    /// Boundary chart JSON.
    #[arg(long)]
    pub chart: Option<PathBuf>,
    /// Use the leaves of a binary tree of this depth.
    #[arg(long)]
    pub tree_depth: Option<u32>,
    #[arg(long)]
    pub bourdon_eps: Option<f64>,
    #[arg(long)]
    pub hamenstadt_eps: Option<f64>,
    /// Puncture of the Hamenstädt metric; the first point when absent.
    #[arg(long)]
    pub anchor: Option<String>,
    /// Check comparability of the two metrics on quadruples.
    #[arg(long, requires_all = ["bourdon_eps", "hamenstadt_eps"])]
    pub certify_comparability: bool,
    /// Scan every quadruple regardless of chart size.
    #[arg(long)]
    pub exhaustive: bool,
    /// Quadruples drawn when sampling.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    /// Estimate doubling constants of the computed metrics.
    #[arg(long)]
    pub doubling: bool,
    #[arg(long, alias = "output")]
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    PhiUniform,
    Geodesic,
    Uniformity,
    Spherical,
    Qh,
    Integral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StencilArg {
    Moore,
    Extended,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    Plain,
    Sqrt,
}

#[derive(Args, Debug, Serialize)]
pub struct DomainArgs {
    #[arg(long, value_enum)]
    pub check: Check,
    /// Domain description (JSON, or TOML by extension).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Grid spacing.
    #[arg(long)]
    pub h: Option<f64>,
    /// Sampling window `x0,y0,x1,y1` (or six numbers in 3D).
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long, value_enum, default_value_t = StencilArg::Extended)]
    pub stencil: StencilArg,
    /// Growth function in t, e.g. `t`, `exp(t)-1`, `t^2`.
    #[arg(long, default_value = "t")]
    pub phi: String,
    /// Pair CSV with rows x1,y1,x2,y2.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Also check growth from the deepest node (bounded domains).
    #[arg(long)]
    pub growth: bool,
    /// Boundary base point for the spherical check.
    #[arg(long, allow_hyphen_values = true)]
    pub base: Option<String>,
    /// Quasiconvexity constant for the spherical check.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Random detours in the ball-separation family.
    #[arg(long, default_value_t = 16)]
    pub competitors: usize,
    /// Fail when the estimated constant exceeds this.
    #[arg(long)]
    pub bound: Option<f64>,
    #[arg(long, value_enum, default_value_t = VariantArg::Plain)]
    pub variant: VariantArg,
    #[arg(long, alias = "output")]
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct RegularityArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Fit Ahlfors regularity from the point weights in the input.
    #[arg(long)]
    pub weights: bool,
    /// Number of sampled (center, radius) pairs for the doubling estimate.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    #[arg(long, alias = "output")]
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ExportArgs {
    /// Report JSON carrying a scatter.
    #[arg(long)]
    pub report: PathBuf,
    /// CSV path; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}
