//! `finsler`: file-driven front end to `finsler-core`.
//!
//! Exit codes: 0 PASS, 1 FAIL or INCONCLUSIVE, 2 usage or parse error,
//! 3 numeric precondition (degeneracy, cone exit, sampling exhaustion).

mod args;
mod commands;
mod input;
mod manifest;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use output::Failure;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { output::EXIT_USAGE } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
