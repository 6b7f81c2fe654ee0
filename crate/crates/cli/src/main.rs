//! `lsgd`: shell access to the smoothing solvers, optimizer runs, saddle
//! analysis and polar experiment sweeps.

mod args;
mod commands;
mod config;
mod error;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::CliError;

/// Finds `--config` and the subcommand name without a full parse, so that a
/// config file can supply flags the command line leaves out.
fn prescan(argv: &[OsString]) -> (Option<PathBuf>, Option<&'static str>) {
    let mut config = None;
    let mut command = None;
    let mut it = argv.iter().skip(1);
    while let Some(arg) = it.next() {
        let Some(text) = arg.to_str() else { continue };
        if text == "--" {
            break;
        } else if text == "--config" {
            config = it.next().map(PathBuf::from);
        } else if let Some(v) = text.strip_prefix("--config=") {
            config = Some(PathBuf::from(v));
        } else if command.is_none() {
            command = config::SUBCOMMANDS.iter().copied().find(|c| *c == text);
        }
    }
    (config, command)
}

fn parse(argv: Vec<OsString>) -> Result<Cli, CliError> {
    let (Some(path), Some(command)) = prescan(&argv) else {
        return Ok(Cli::try_parse_from(&argv)?);
    };
    let extra = config::override_args(&path, command)?;
    let mut argv = argv;
    argv.extend(extra.into_iter().map(OsString::from));
    Cli::try_parse_from(&argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Clap(e),
        _ => CliError::usage(format!(
            "{}: {}",
            path.display(),
            CliError::Clap(e).one_line()
        )),
    })
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Smooth(a) => commands::smooth(a),
        Command::Optimize(a) => commands::optimize(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Sweep(a) => commands::sweep(a),
    }
}

fn main() -> ExitCode {
    let result = parse(std::env::args_os().collect()).and_then(dispatch);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Clap(e))
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) =>
        {
            print!("{}", e.render());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("lsgd: {}", e.one_line());
            ExitCode::from(e.exit_code())
        }
    }
}
