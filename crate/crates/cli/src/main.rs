use std::process::ExitCode;

use clap::Parser;
use fluxdec::args::{Cli, Command};
use fluxdec::commands;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify(a) => commands::verify(a),
        Command::Flow(a) => commands::flow(a),
        Command::Phase(a) => commands::phase(a),
        Command::Sample(a) => commands::sample(a),
        Command::Fixtures(a) => commands::write_fixtures(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fluxdec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
