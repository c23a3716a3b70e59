//! `cgo`: command-line front end for the CGO solver, the zone asymptotics
//! and the comparison sweeps.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on numerical failure.
//! Thread count follows `RAYON_NUM_THREADS`.

mod args;
mod commands;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("{0}: {1}")]
    Csv(PathBuf, csv::Error),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Core(#[from] cgo_core::Error),
}

impl CliError {
    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(path.to_path_buf(), e)
    }

    fn exit_code(&self) -> u8 {
        use cgo_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io(..) | CliError::Csv(..) => 1,
            CliError::Core(E::Parameter(_) | E::Domain(_)) => 1,
            CliError::Numerical(_) | CliError::Core(_) => 2,
        }
    }
}

/// Splices the entries of `--config FILE` in front of the command-line
/// flags so that explicit flags win.
fn expand_config(raw: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    for (i, a) in raw.iter().enumerate() {
        if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        } else if a == "--config" {
            path = raw.get(i + 1).map(PathBuf::from);
        }
    }
    let Some(path) = path else { return Ok(raw) };
    let flags = output::config_flags(&path)?;
    let Some(cmd) = raw.iter().skip(1).position(|a| !a.starts_with('-')) else { return Ok(raw) };
    let at = cmd + 2;
    let mut out = raw[..at].to_vec();
    out.extend(flags);
    out.extend_from_slice(&raw[at..]);
    Ok(out)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Asym(a) => commands::asym(a),
        Command::Gfun(a) => commands::gfun(a),
        Command::Compare(a) => commands::compare(a),
        Command::Reflect(a) => commands::reflect(a),
        Command::ProbeK2(a) => commands::probe_k2(a),
    }
}

fn main() -> ExitCode {
    let argv = match expand_config(std::env::args().collect()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
