//! Command-line surface for KD tables, KD coherence, simulated measurements,
//! linear response, and the property suite.
//!
//! Every command returns JSON carrying a [`manifest::RunManifest`] and a
//! short human-readable summary. Exit codes: 0 success, 1 property failure,
//! 2 invalid input, 3 optimizer failure.

pub mod args;
pub mod commands;
pub mod error;
pub mod inputs;
pub mod manifest;
pub mod properties;

use args::{Cli, Command};
use commands::Outcome;
use error::CliError;

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Coherence(a) => commands::coherence(a, cli.verbose),
        Command::KdTable(a) => commands::kd_table_cmd(a),
        Command::Simulate(a) => commands::simulate(a, cli.verbose),
        Command::Response(a) => commands::response(a, cli.verbose),
        Command::CheckProperties(a) => commands::check_properties(a),
        Command::RandomState(a) => commands::random_state(a),
    }
}
