//! `eigenshrink`: optimal eigenvalue shrinkers from the command line.
//!
//! Exit status is 0 on success, 1 for usage errors (bad flags, unknown loss
//! ids, malformed input files) and 2 for numeric or capacity failures.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(eigenshrink::Error),
    Io(String),
    /// A check ran and reported failures.
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use eigenshrink::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Lib(E::Domain(_) | E::Unsupported(_)) => 1,
            CliError::Lib(_) | CliError::Failed(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<eigenshrink::Error> for CliError {
    fn from(e: eigenshrink::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "eigenshrink",
    version,
    about = "Optimal eigenvalue shrinkage for spiked covariance models",
    after_help = "A JSON file given with --config (a flat object keyed by long flag names) \
                  overrides flags on the command line, which override defaults.\n\
                  EIGENSHRINK_THREADS caps the number of worker threads."
)]
struct Cli {
    /// Print the 26 loss ids and exit
    #[arg(long)]
    list_losses: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write to this file instead of stdout
    #[arg(long, short)]
    output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Closed,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportKind {
    /// Large-λ slope lim η(λ)/λ
    Slopes,
    /// η(λ)/λ at a finite λ
    SlopeHat,
    /// Large-λ shift lim η(λ) − λ (unit-slope losses only)
    Shifts,
    /// Percent improvement over hard thresholding at the bulk edge
    Ppi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ShrinkerArg {
    Optimal,
    Hard,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvaluationArg {
    Reduced,
    Full,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Shrink sample eigenvalues, or a whole sample covariance matrix
    #[command(args_override_self = true)]
    Shrink {
        #[arg(long, default_value = "F,1")]
        loss: String,
        /// Aspect ratio p/n in (0, 1]
        #[arg(long)]
        gamma: f64,
        /// Comma-separated eigenvalues
        #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["input", "matrix"])]
        values: Option<String>,
        /// One-column CSV of eigenvalues
        #[arg(long, conflicts_with = "matrix")]
        input: Option<PathBuf>,
        /// Square CSV matrix (no header); prints the shrunken matrix
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Tabulate shrinkers over a λ grid
    #[command(args_override_self = true)]
    Tabulate {
        #[arg(long, default_value = "all")]
        loss: String,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        min: f64,
        #[arg(long)]
        max: f64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, value_enum, default_value_t = Spacing::Linear)]
        spacing: Spacing,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Slopes, shifts and percent improvement per loss
    #[command(args_override_self = true)]
    Report {
        #[arg(value_enum)]
        kind: ReportKind,
        #[arg(long, default_value = "all")]
        loss: String,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// λ used by slope-hat and by approximate shifts
        #[arg(long, default_value_t = eigenshrink::shrinker::DEFAULT_FINITE_LAMBDA)]
        at_lambda: f64,
        /// Spike strength used by ppi
        #[arg(long, default_value_t = eigenshrink::shrinker::DEFAULT_PPI_ELL)]
        ell: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo check of the asymptotic predictions
    #[command(args_override_self = true)]
    Simulate {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        p: usize,
        /// Comma-separated decreasing spikes; empty for the null model
        #[arg(long, default_value = "5")]
        spikes: String,
        #[arg(long, default_value = "F,1")]
        loss: String,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ShrinkerArg::Optimal)]
        shrinker: ShrinkerArg,
        /// CSV of (lambda, eta) knots for --shrinker table
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = EvaluationArg::Reduced)]
        evaluation: EvaluationArg,
        /// Lift the size ceiling
        #[arg(long)]
        allow_large: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check every closed-form shrinker against the numeric optimizer
    #[command(args_override_self = true)]
    Selfcheck {
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Perturb one closed form to confirm failures are caught
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
        /// Write the report to this file instead of stdout
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("EIGENSHRINK_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("EIGENSHRINK_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn run() -> Result<(), CliError> {
    let args = config::expand_args(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    configure_threads()?;
    if cli.list_losses {
        print!("{}", commands::loss_grid());
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(CliError::Usage("a subcommand is required (see --help)".into()));
    };
    commands::dispatch(command)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eigenshrink: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
