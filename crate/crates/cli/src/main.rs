mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use hexnet::Error;

use args::{Cli, Command};

/// 1 for broken invariants, 2 for usage, I/O and format problems.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Integrity(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Transform(a) => commands::transform(&a),
        Command::Metrics(a) => commands::metrics(&a),
        Command::Train(a) => commands::train(&a),
        Command::Generate(a) => commands::generate(&a),
        Command::Render(a) => commands::render(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
