use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qsr_cli::{run, Cli, CliError};

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.config.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            // A closed pipe downstream is not an error of ours.
            let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match run(&cli).and_then(|o| emit(&cli, &o.text).map(|()| o.status)) {
        Ok(status) => status,
        Err(err) => {
            eprintln!("error: {err}");
            err.status()
        }
    };
    ExitCode::from(status as u8)
}
