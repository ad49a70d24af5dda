//! `chi2-regimes` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 malformed or
//! unreadable data. P-values never affect the exit code.

mod args;
mod commands;
mod error;
mod gof;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let outcome = match &cli.command {
        Command::Gof(a) => commands::gof(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Theory(a) => commands::theory(a),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
