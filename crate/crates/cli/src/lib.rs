//! Command-line front end: argument parsing, dispatch, reports and exit codes.

pub mod args;
pub mod commands;
pub mod error;
pub mod families;
pub mod output;
pub mod sweep;

use std::ffi::OsString;

use clap::Parser;

pub use args::{Cli, Command};
pub use error::CliError;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "HARDY_LAB_THREADS";

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Constant(a) => commands::constant(a, g),
        Command::Muckenhoupt(a) => commands::muckenhoupt(a, g),
        Command::Verify(a) => commands::verify(a, g),
        Command::Sharpness(a) => commands::sharpness(a, g),
        Command::CheckAdhoc(a) => commands::check_adhoc(a, g),
        Command::Opcheck(a) => commands::opcheck(a, g),
        Command::Counterexample(a) => commands::counterexample(a, g),
        Command::Sweep(a) => commands::sweep_cmd(a, g),
    }
}

fn pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Io(e.to_string()))
}

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 all checks hold, 1 a violation, 2 usage or I/O error, 3 numerical failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = pool().and_then(|p| p.install(|| dispatch(&cli)));
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
