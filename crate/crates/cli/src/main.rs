//! `polarsim`: runs simulations, ensembles, constructive schedules and lab
//! experiments, writing CSV/JSON outputs plus a replayable manifest.
//!
//! Exit codes: 0 ok, 2 usage or input error, 3 invariant breach,
//! 4 post-condition failure of an executed schedule.

mod cli;
mod commands;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

pub(crate) fn parse_from(argv: &[String]) -> Result<cli::Cli, clap::Error> {
    cli::Cli::try_parse_from(std::iter::once("polarsim".to_string()).chain(argv.iter().cloned()))
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match parse_from(&argv) {
        Ok(c) => c,
        // clap exits 2 on usage errors and 0 for --help / --version.
        Err(e) => e.exit(),
    };
    match commands::run(cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polarsim: {e}");
            e.exit_code()
        }
    }
}
