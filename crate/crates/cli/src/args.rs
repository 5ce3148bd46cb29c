use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Multinacci ratios, companion-matrix spectra and escape-time classification.
///
/// Orders can be given as paper-k (`--paper-k`, k = m - 1) or as the number
/// of summed terms m (`--order`); every table prints both.
#[derive(Debug, Parser)]
#[command(name = "multinacci", version)]
pub struct Cli {
    /// key=value file supplying defaults; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads for the data-parallel paths.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Terms of one k-step sequence.
    Seq(SeqArgs),
    /// Inverse ratios phi for a range of orders.
    Phis(PhiArgs),
    /// Successive differences phi(k) - phi(k+1).
    Diffs(PhiArgs),
    /// All companion-matrix eigenvalues for one order or a range.
    Eigen(EigenArgs),
    /// The point cloud 1/lambda over a range of orders.
    Points(PointsArgs),
    /// Escape-time membership of the point cloud in Mandelbrot/Julia sets.
    Classify(ClassifyArgs),
    /// Iteration-count grid as PGM, or SVG with the point cloud overlaid.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Pgm,
    Svg,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Pgm => "pgm",
            Format::Svg => "svg",
        }
    }
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Write the artifact here and print a summary on stdout. Without it the
    /// artifact goes to stdout and the summary to stderr.
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OrderArg {
    /// Number of summed terms m (>= 2).
    #[arg(long, conflicts_with = "paper_k")]
    pub order: Option<usize>,

    /// Paper index k = m - 1 (>= 1).
    #[arg(long)]
    pub paper_k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OrderRangeArg {
    /// Range of orders m, e.g. `2..20`.
    #[arg(long, conflicts_with = "paper_ks")]
    pub orders: Option<String>,

    /// Range of paper indices k, e.g. `1..19`.
    #[arg(long)]
    pub paper_ks: Option<String>,
}

#[derive(Debug, Args)]
pub struct SeqArgs {
    #[command(flatten)]
    pub order: OrderArg,

    /// Comma-separated initial values (default: all ones).
    #[arg(long, value_name = "A,B,...")]
    pub init: Option<String>,

    #[arg(long)]
    pub terms: Option<usize>,

    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct PhiArgs {
    /// Largest order m.
    #[arg(long, conflicts_with = "max_paper_k")]
    pub max_order: Option<usize>,

    /// Largest paper index k.
    #[arg(long)]
    pub max_paper_k: Option<usize>,

    #[arg(long)]
    pub terms: Option<usize>,

    /// Decimal digits kept in the full-precision column.
    #[arg(long)]
    pub digits: Option<u32>,

    /// Also report the first order with |phi - 1/2| below this.
    #[arg(long)]
    pub tolerance: Option<f64>,

    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[command(flatten)]
    pub order: OrderArg,

    #[command(flatten)]
    pub range: OrderRangeArg,

    /// Residual bound |p(lambda)| every root must meet.
    #[arg(long)]
    pub tolerance: Option<f64>,

    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct PointsArgs {
    #[command(flatten)]
    pub range: OrderRangeArg,

    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct EscapeArgs {
    #[arg(long)]
    pub max_iter: Option<u32>,

    #[arg(long)]
    pub bailout: Option<f64>,

    /// Stop early on exactly periodic orbits (never changes a verdict).
    #[arg(long)]
    pub cycle_detection: bool,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// `mandelbrot`, `julia:RE` or `julia:RE,IM`; repeatable.
    #[arg(long = "set", value_name = "SET")]
    pub sets: Vec<String>,

    #[command(flatten)]
    pub range: OrderRangeArg,

    /// Point cloud written by `points` (JSON or CSV) instead of computing one.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["orders", "paper_ks"])]
    pub input: Option<PathBuf>,

    #[command(flatten)]
    pub escape: EscapeArgs,

    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// `mandelbrot` or `julia:RE[,IM]`.
    #[arg(long = "set", value_name = "SET")]
    pub set: Option<String>,

    /// Window centre `RE,IM`.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,

    #[arg(long)]
    pub width: Option<f64>,

    #[arg(long)]
    pub height: Option<f64>,

    #[arg(long)]
    pub columns: Option<usize>,

    #[arg(long)]
    pub rows: Option<usize>,

    #[command(flatten)]
    pub escape: EscapeArgs,

    /// Orders whose points are overlaid in SVG output.
    #[command(flatten)]
    pub range: OrderRangeArg,

    #[command(flatten)]
    pub out: Output,
}
