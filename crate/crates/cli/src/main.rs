mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::Value;

use args::{Cli, Command};
use error::CliError;
use output::Sink;

fn run(cli: Cli) -> Result<(), CliError> {
    let params = config::resolve(&cli.global)?;
    let mut sink = Sink::new(cli.global.out.clone());
    let json = cli.global.json;
    let (name, options): (&str, Value) = match &cli.command {
        Command::Point => ("point", commands::point(&params, &mut sink, json)?),
        Command::Spectrum(a) => ("spectrum", commands::spectrum(a, &params, &mut sink)?),
        Command::PumpSweep(a) => (
            "pump-sweep",
            commands::pump_sweep(a, &params, &mut sink, json)?,
        ),
        Command::SqueezeSweep(a) => (
            "squeeze-sweep",
            commands::squeeze_sweep(a, &params, &mut sink, json)?,
        ),
        Command::Verify(_) => return verify(&cli, &params, sink),
        Command::Montecarlo(a) => (
            "montecarlo",
            commands::montecarlo(a, &params, &mut sink, json)?,
        ),
    };
    let seed = match cli.command {
        Command::Montecarlo(_) => Some(
            params
                .seed
                .unwrap_or(qfc_core::langevin::SimConfig::default().seed),
        ),
        _ => None,
    };
    sink.finish(name, &params, options, seed)
}

/// The verdict JSON written to `--out` already embeds the manifest.
fn verify(cli: &Cli, params: &config::Resolved, mut sink: Sink) -> Result<(), CliError> {
    let Command::Verify(a) = &cli.command else {
        unreachable!()
    };
    commands::verify(a, params, &mut sink, cli.global.json).map(|_| ())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
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
