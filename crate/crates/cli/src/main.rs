//! `vfnn`: build, evaluate, verify and benchmark Voronoi threshold networks.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 network/oracle equivalence failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use voronoi_fnn::{Sampling, TieMode};

#[derive(Debug, Parser)]
#[command(
    name = "vfnn",
    version,
    about = "Explicit threshold networks on Voronoi cells"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Base seed for every random draw
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output rule on cell boundaries [default: lowest, or the model's own]
    #[arg(long, global = true, value_enum)]
    pub tie_mode: Option<TieArg>,

    /// Second-layer margin, in [0, 1)
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TieArg {
    Paper,
    Lowest,
}

impl From<TieArg> for TieMode {
    fn from(t: TieArg) -> Self {
        match t {
            TieArg::Paper => TieMode::PaperFaithful,
            TieArg::Lowest => TieMode::LowestIndex,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SamplingArg {
    /// Midpoint grid (1-D only)
    Grid,
    Random,
}

impl From<SamplingArg> for Sampling {
    fn from(s: SamplingArg) -> Self {
        match s {
            SamplingArg::Grid => Sampling::UniformGrid1D,
            SamplingArg::Random => Sampling::Random,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a network from a samples CSV and save it
    Build {
        samples: PathBuf,
        out: PathBuf,
        /// The CSV starts with a header row
        #[arg(long)]
        header: bool,
    },
    /// Evaluate a saved network
    Eval {
        model: PathBuf,
        /// CSV of query points, one per row
        #[arg(long, conflicts_with = "point")]
        points: Option<PathBuf>,
        /// A single query as comma-separated coordinates
        #[arg(long, allow_hyphen_values = true)]
        point: Vec<String>,
        #[arg(long)]
        header: bool,
        /// Write predictions here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a saved network against brute-force nearest neighbour
    Check {
        model: PathBuf,
        samples: PathBuf,
        #[arg(long)]
        header: bool,
        /// Number of uniform random queries
        #[arg(long, default_value_t = 10_000)]
        queries: usize,
        /// Query box as `lo:hi` (all axes) or `lo1:hi1,lo2:hi2,...` [default: sample bounding box]
        #[arg(long, allow_hyphen_values = true)]
        domain: Option<String>,
        /// Relative squared-distance gap treated as a near tie
        #[arg(long, default_value_t = voronoi_fnn::oracle::DEFAULT_NEAR_TIE_TOL)]
        near_tie_tol: f64,
    },
    /// Error-versus-n table for a benchmark target
    Convergence(ConvergenceArgs),
    /// Validation error next to both a-priori bounds
    Bound(BoundArgs),
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    /// Target name, e.g. cos1d, jump1d, linear1d, gauss:d=2, sine:d=4:omega=pi
    #[arg(long)]
    pub target: String,
    /// Comma-separated, strictly increasing training sizes
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(long, value_enum, default_value_t = SamplingArg::Random)]
    pub sampling: SamplingArg,
    /// Validation points per repetition [default: 200 in 1-D, 10000 otherwise]
    #[arg(long)]
    pub m: Option<usize>,
    /// Repetitions averaged per n
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    /// Monte-Carlo points for the bound columns (0 leaves them empty)
    #[arg(long, default_value_t = 20_000)]
    pub mc_points: usize,
    /// Write the CSV table here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Benchmark target; trains on --n samples drawn with --sampling
    #[arg(long, conflicts_with = "samples", required_unless_present = "samples")]
    pub target: Option<String>,
    #[arg(long, requires = "target")]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value_t = SamplingArg::Random)]
    pub sampling: SamplingArg,
    /// Samples CSV to bound instead of a benchmark target
    #[arg(long, requires_all = ["grad_sup", "domain"])]
    pub samples: Option<PathBuf>,
    #[arg(long)]
    pub header: bool,
    /// sup of the gradient norm (required with --samples)
    #[arg(long)]
    pub grad_sup: Option<f64>,
    /// Integration box (required with --samples)
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// Validation points for the measured error (targets only)
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub mc_points: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
