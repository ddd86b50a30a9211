use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use gpas_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            let written = match &outcome.output {
                Some(path) => std::fs::write(path, &outcome.payload),
                None => std::io::stdout().write_all(outcome.payload.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: failed to write output: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
