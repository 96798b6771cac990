//! `hermshock`: solve, dump and verify Hermite moment profiles.
//!
//! Exit codes: 0 success, 2 no convergence or order below `--p-min`,
//! 3 invalid configuration or input file, 4 numerical failure.

mod config;
mod output;
mod run;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command, Kind};

fn dispatch(cli: Cli) -> Result<(), run::Failure> {
    let (kind, flags) = match cli.command {
        Command::Verify(v) => return run::verify(&v),
        Command::Soliton(f) => (Kind::Soliton, f),
        Command::Shock(f) => (Kind::Shock, f),
        Command::Elast1(f) => (Kind::Elast1, f),
        Command::Elast2(f) => (Kind::Elast2, f),
        Command::Matrices(f) => (Kind::Matrices, f),
    };
    let cfg = config::resolve(kind, flags)?;
    match kind {
        Kind::Matrices => run::matrices(&cfg),
        _ => run::solve(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
