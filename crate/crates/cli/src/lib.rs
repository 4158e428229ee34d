//! The `splitsea` command line: argument and config handling, artifact
//! writers, and one function per subcommand.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod config;
pub mod error;
pub mod io;
pub mod run;
pub mod svg;

use clap::error::ErrorKind;
use clap::Parser;

pub use error::CliError;

/// Threads from SPLITSEA_THREADS, else the flag; `None` keeps rayon's default.
fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match std::env::var("SPLITSEA_THREADS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("SPLITSEA_THREADS={v:?} is not a count")))?,
        ),
        Err(_) => flag,
    };
    if n == Some(0) {
        return Err(CliError::Config("thread count must be positive".into()));
    }
    Ok(n)
}

/// Runs the CLI on `argv` and returns the process exit code.
pub fn main_with(argv: Vec<String>) -> i32 {
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(m) => {
            eprintln!("error: {}", CliError::Config(m));
            return 2;
        }
    };
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    let result = thread_count(cli.threads).and_then(|n| {
        if let Some(n) = n {
            // fails only if a pool already exists, as in repeated in-process runs
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        run::run(&cli)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
