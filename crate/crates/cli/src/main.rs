//! Command-line front end: builds maps, runs the analysis modules, and
//! emits deterministic reports.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 numeric failure,
//! 4 I/O failure.

mod commands;
mod config;
mod curves;
mod dashboard;
mod maps;
mod output;
mod svg;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "metricfact",
    version,
    about = "Metric-derivative, content, and tree-factorization analysis of grid-sampled Lipschitz maps"
)]
pub struct Cli {
    /// Key-value config file; explicit flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Clone, Default)]
pub struct MapArgs {
    /// Builtin map name (constant, coordinate, quadratic, projection, fold,
    /// sine, identity2, circle, spiral, example-plateau).
    #[arg(long)]
    pub map: Option<String>,

    /// Sampled-map file (.smap text or binary), alternative to --map.
    #[arg(long)]
    pub file: Option<String>,

    /// Domain dimension for builtins that allow choosing it.
    #[arg(long)]
    pub dim: Option<usize>,

    /// Grid points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Metric-derivative rank field: ranks, Jacobians, strata fractions.
    MdField {
        #[command(flatten)]
        map: MapArgs,
        /// Singular-value threshold for the numerical rank (default 10 h L).
        #[arg(long)]
        tau: Option<f64>,
        /// Landmark count for non-sup targets.
        #[arg(long)]
        landmarks: Option<usize>,
        /// Landmark index file (one grid linear index per line) overriding
        /// farthest-point selection.
        #[arg(long)]
        landmark_file: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Dyadic mapping content by dynamic programming, with the cover.
    Content {
        #[command(flatten)]
        map: MapArgs,
        /// Image content order (default 2).
        #[arg(long)]
        n: Option<usize>,
        /// Maximum dyadic depth (default 4).
        #[arg(long)]
        depth: Option<u32>,
        /// Use the exact image oracle of the builtin map when available.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        out: Option<String>,
    },
    /// Re-validates a stored content report against its map.
    VerifyCover {
        #[command(flatten)]
        map: MapArgs,
        /// content.json produced by the content subcommand.
        #[arg(long)]
        report: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        oracle: bool,
    },
    /// Quotient factorization: class table, contracted edges, certificates.
    Factorize {
        #[command(flatten)]
        map: MapArgs,
        /// Gluing threshold (default 2 h L).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Quadruple budget for the four-point scan.
        #[arg(long)]
        budget: Option<usize>,
        /// Number of random loops for the loop-area scan.
        #[arg(long)]
        loops: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Tree certificate only (four-point defect plus loop areas).
    TreeCheck {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        loops: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Four-point defect tolerance for the verdict (default 8 h).
        #[arg(long)]
        defect_tol: Option<f64>,
        /// Loop-area tolerance for the verdict (default 0.1).
        #[arg(long)]
        area_tol: Option<f64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Area-formula check on a 1-D map, or length/oriented-area of a curve.
    AreaCheck {
        #[command(flatten)]
        map: MapArgs,
        /// Curve CSV (param, coordinates...); alternative to --map.
        #[arg(long)]
        curve: Option<String>,
        /// Treat the CSV curve as closed.
        #[arg(long)]
        closed: bool,
        /// Image clustering radius (default 3 h L).
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Coarea check for maps into the line.
    CoareaCheck {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        out: Option<String>,
    },
    /// Heisenberg-group operations on curves.
    Heisenberg {
        #[command(subcommand)]
        action: HeisenbergAction,
    },
    /// Every factorization condition on one map, with reports and plots.
    Dashboard {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Subcommand)]
pub enum HeisenbergAction {
    /// Horizontal lift of a planar CSV curve.
    Lift {
        #[arg(long)]
        curve: String,
        /// Base height of the lift.
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Horizontality defect and projected length of a Heisenberg curve.
    Check {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Projection area formula over one or more horizontal curves.
    Area {
        #[arg(long, num_args = 1.., required = true)]
        curves: Vec<String>,
        /// Image clustering radius.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        out: Option<String>,
    },
}

/// Error carrying its process exit code.
pub enum CliError {
    Config(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numeric(m) | CliError::Io(m) => m,
        }
    }
}

impl From<metricfact::Error> for CliError {
    fn from(e: metricfact::Error) -> Self {
        match e {
            metricfact::Error::InvalidInput(_) | metricfact::Error::DimensionMismatch { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return ExitCode::from(e.code());
        }
    };
    match commands::dispatch(cli.command, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
