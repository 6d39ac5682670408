use std::process::ExitCode;

use clap::Parser;
use mfcap::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match mfcap::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mfcap {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
