//! Command implementations behind the `brier` binary. Each command returns
//! its complete output as a string so that runs can be compared byte for
//! byte.

pub mod args;
pub mod commands;
pub mod error;
pub mod input;

pub use args::{Cli, Command};
pub use error::{CliError, CliResult};

pub fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Decompose(a) => commands::decompose(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Ar1(a) => commands::ar1(a),
    }
}
