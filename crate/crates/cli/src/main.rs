use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use kd_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match kd_cli::run(&cli) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.json).expect("JSON values serialize");
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if !cli.quiet {
                eprint!("{}", outcome.table);
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
