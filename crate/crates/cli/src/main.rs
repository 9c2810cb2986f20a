mod args;
mod commands;
mod error;
mod input;
mod manifest;

use std::process::ExitCode;

use clap::{ArgMatches, CommandFactory, FromArgMatches};

use crate::args::{Cli, Command};
use crate::error::{CliError, CliResult};
use crate::manifest::Run;

/// Every argument of the subcommand as resolved, defaults included, sorted by name.
fn resolved_params(def: &clap::Command, m: &ArgMatches) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = def
        .get_arguments()
        .map(|a| a.get_id())
        .filter_map(|id| {
            let raw = m.try_get_raw(id.as_str()).ok()??;
            let vals: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
            Some((id.to_string(), vals.join(",")))
        })
        .collect();
    out.sort();
    out
}

fn dispatch(cmd: &Command, run: &mut Run) -> CliResult<()> {
    match cmd {
        Command::Simulate(a) => commands::simulate(a, run),
        Command::Analyze(a) => commands::analyze(a, run),
        Command::Fit(a) => commands::fit(a, run),
        Command::Gof(a) => commands::gof(a, run),
        Command::Em(a) => commands::em(a, run),
        Command::P0(a) => commands::p0(a, run),
        Command::Rateeq(a) => commands::rateeq(a, run),
    }
}

fn execute(cli: &Cli, params: Vec<(String, String)>) -> CliResult<()> {
    let common = cli.command.common();
    let mut run = Run::start(cli.command.name(), &common.output_dir, params)?;
    let result = match common.jobs {
        Some(0) => Err(CliError::Usage("--jobs must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))
            .and_then(|pool| pool.install(|| dispatch(&cli.command, &mut run))),
        None => dispatch(&cli.command, &mut run),
    };
    let status = match &result {
        Ok(()) => "ok".to_string(),
        Err(e) => format!("error (exit {}): {e}", e.exit_code()),
    };
    // a manifest accompanies partial results too
    run.finish(status.lines().next().unwrap_or_default())?;
    result
}

fn main() -> ExitCode {
    let def = Cli::command();
    let matches = def.clone().get_matches();
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    let params = matches
        .subcommand()
        .and_then(|(name, sub)| Some(resolved_params(def.find_subcommand(name)?, sub)))
        .unwrap_or_default();
    match execute(&cli, params) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
