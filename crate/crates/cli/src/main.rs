//! `radex`: generalized derivatives, weak subgradients, regularity and
//! radial descent from the command line.

mod args;
mod commands;
mod output;

use std::io::Write as _;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use commands::CliError;

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("RADEX_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("RADEX_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap picks 0 for --help/--version and 2 for usage errors.
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = init_threads().and_then(|()| commands::run(&cli.command));
    match result {
        Ok(out) => {
            let written = match &out.path {
                Some(path) => std::fs::write(path, &out.text).map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => std::io::stdout().lock().write_all(out.text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(msg) = written {
                eprintln!("error: {msg}");
                return ExitCode::from(1);
            }
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::from(if out.fault { 1 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
