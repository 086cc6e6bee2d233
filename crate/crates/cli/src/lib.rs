//! The `evi` command-line tool: tail index estimates for a dataset, Monte Carlo
//! studies, asymptotic diagnostics and optimal tail-fraction lookup.
//!
//! Exit codes: 0 success, 2 input parse, 3 estimation, 4 configuration, 5 lookup.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use evi_core::{EstimatorId, RhoMethod};

pub mod commands;
pub mod dataset;
mod error;
pub mod output;

pub use error::{CliError, CliResult, EXIT_CONFIG, EXIT_ESTIMATION, EXIT_LOOKUP, EXIT_OK, EXIT_PARSE};

use dataset::ColumnSelector;

#[derive(Debug, Parser)]
#[command(name = "evi", version, about = "Extreme value index estimation for Pareto-type tails")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the extreme value index of a dataset over a range of k.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo study and write summary.csv plus a metadata sidecar.
    Simulate(SimulateArgs),
    /// Tabulate the weighted covariate sums and the AMSE against k.
    Diagnose(DiagnoseArgs),
    /// Find the k with the smallest MSE in a summary file.
    OptimalK(OptimalKArgs),
    /// Where to obtain the example datasets.
    FetchNote,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Delimited text file with one value per row.
    pub dataset: PathBuf,
    /// Comma-separated subset of HILL, BCHILL, LS, RR, WLS.
    #[arg(long, value_delimiter = ',', default_value = "HILL,BCHILL,LS,RR,WLS")]
    pub estimators: Vec<EstimatorId>,
    /// fixed:<v>, moment or minvar.
    #[arg(long, default_value = "minvar", allow_hyphen_values = true)]
    pub rho: RhoMethod,
    /// A single tail fraction; overrides --k-min/--k-max.
    #[arg(long)]
    pub k: Option<usize>,
    /// Defaults to min(5, n-1).
    #[arg(long)]
    pub k_min: Option<usize>,
    /// Defaults to n-1.
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Column name or 1-based position; defaults to the first numeric column.
    #[arg(long)]
    pub column: Option<ColumnSelector>,
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    /// Treat the first row as a header (auto-detected otherwise).
    #[arg(long, conflicts_with = "no_header")]
    pub header: bool,
    #[arg(long)]
    pub no_header: bool,
    /// Output CSV path; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dist {
    Pareto,
    Burr,
    Frechet,
    Loggamma,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub dist: Dist,
    /// Pareto index; for frechet and loggamma an alternative to --alpha / --lambda.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub eta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to min(5, n-1).
    #[arg(long)]
    pub k_min: Option<usize>,
    /// Defaults to n-1.
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub k_step: usize,
    #[arg(long, value_delimiter = ',', default_value = "HILL,BCHILL,LS,RR,WLS")]
    pub estimators: Vec<EstimatorId>,
    #[arg(long, default_value = "minvar", allow_hyphen_values = true)]
    pub rho: RhoMethod,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AmseChoice {
    Derivation,
    Displayed,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,
    #[arg(long, default_value_t = 10)]
    pub k_min: usize,
    #[arg(long, default_value_t = 1000)]
    pub k_max: usize,
    #[arg(long, default_value_t = 1)]
    pub k_step: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub gamma: f64,
    /// Bias coefficient in the AMSE: 2 (derivation) or 4 (displayed formula).
    #[arg(long, value_enum, default_value_t = AmseChoice::Derivation)]
    pub amse: AmseChoice,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimalKArgs {
    /// A summary.csv written by `simulate`.
    pub summary: PathBuf,
    #[arg(long, default_value = "WLS")]
    pub estimator: EstimatorId,
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let command_line: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut stdout = std::io::stdout().lock();
    let result = match &cli.command {
        Command::Estimate(a) => commands::estimate(a, &command_line, &mut stdout),
        Command::Simulate(a) => commands::simulate(a, &command_line, &mut stdout),
        Command::Diagnose(a) => commands::diagnose(a, &mut stdout),
        Command::OptimalK(a) => commands::optimal_k(a, &mut stdout),
        Command::FetchNote => commands::fetch_note(&mut stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
