//! The `somqe` command line: synthetic corpora, training, classification and benchmarks.

pub mod args;
pub mod bench;
mod commands;
pub mod error;
pub mod pipeline;

use std::ffi::OsString;

use clap::Parser;

pub use args::Cli;
pub use bench::{BenchReport, Budget};
pub use error::CliError;

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("somqe: {e}");
            e.exit_code()
        }
    }
}
