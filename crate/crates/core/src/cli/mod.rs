//! The `frontier-merge` command line.

mod analysis;
mod merge;

use std::ffi::OsString;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use analysis::{CalibArgs, FrontierArgs, InspectArgs, OutputFormat};
pub use merge::{parse_grid, resolve_lambdas, MergeArgs, RecipeArgs, SweepArgs, DEFAULT_NAME_TEMPLATE};

use crate::error::{Error, Result};

/// Environment variable holding the log filter (e.g. `info`, `debug`).
pub const LOG_ENV: &str = "FRONTIER_MERGE_LOG";

#[derive(Debug, Parser)]
#[command(name = "frontier-merge", version, about = "Merge PT/IT checkpoints and trace the accuracy-calibration frontier")]
pub struct Cli {
    /// Worker threads for merge kernels and parallel sweep jobs (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Merge a PT/IT pair at one lambda.
    Merge(MergeArgs),
    /// Merge across a lambda grid; outputs already on disk with the same recipe are kept.
    Sweep(SweepArgs),
    /// Calibration reports and reliability bins from JSONL prediction logs.
    Calib(CalibArgs),
    /// Pareto frontier, lambda*, scaling statistics and lambda > 1 degradation.
    Frontier(FrontierArgs),
    /// List the tensors and metadata of a checkpoint.
    Inspect(InspectArgs),
}

pub fn run(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Merge(args) => merge::cmd_merge(&args),
        Command::Sweep(args) => merge::cmd_sweep(&args),
        Command::Calib(args) => analysis::cmd_calib(&args),
        Command::Frontier(args) => analysis::cmd_frontier(&args),
        Command::Inspect(args) => analysis::cmd_inspect(&args),
    })
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "warn");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

/// `error: CODE: message` on one line.
pub fn error_line(err: &Error) -> String {
    let message = err.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
    format!("error: {}: {}", err.code(), message)
}

/// Parse `args`, run, and map failures to an exit status. Module errors exit
/// 1 and usage errors 2; either way the last stderr line is `error: CODE: ...`.
pub fn main_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let failed = e.use_stderr();
            let _ = e.print();
            if !failed {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: USAGE: invalid command-line arguments");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::FAILURE
        }
    }
}

/// Write via a sibling temporary file so readers never see a partial file.
pub(crate) fn write_atomic(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
