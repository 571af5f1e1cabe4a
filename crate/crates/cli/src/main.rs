//! `hrsfer`: SNR thresholds, FER analysis and Monte-Carlo simulation of
//! relay-selection schemes.
//!
//! Exit codes: 0 success, 1 invalid input, 2 calibration budget exhausted,
//! 3 tolerance gate failed.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod calibrate;
mod commands;
mod error;
mod plot;
mod scenario;
mod table;

use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

use commands::compare::CompareArgs;
use commands::reproduce::ReproduceArgs;
use commands::run::ScenarioArgs;
use commands::threshold::ThresholdArgs;
use commands::Context;

#[derive(Debug, Parser)]
#[command(
    name = "hrsfer",
    version,
    about = "FER analysis and simulation of hybrid relay selection"
)]
struct Cli {
    /// Worker threads for Monte-Carlo runs.
    #[arg(long, global = true, env = "HRSFER_THREADS")]
    threads: Option<usize>,
    /// More log output (-v, -vv). RUST_LOG overrides.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// SNR thresholds of an uncoded or convolutionally coded link.
    Threshold(ThresholdArgs),
    /// Analytical and high-SNR FER of a scenario.
    Analyze(ScenarioArgs),
    /// Monte-Carlo FER of a scenario.
    Simulate(ScenarioArgs),
    /// Thresholds, analysis, simulation, report and plot of a preset case.
    Reproduce(ReproduceArgs),
    /// Join result CSVs on their SNR grid and gate on relative error.
    Compare(CompareArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .init();

    if cli.threads == Some(0) {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(1);
    }
    let ctx = Context { threads: cli.threads };
    let result = match &cli.command {
        Command::Threshold(a) => commands::threshold::run(a, &ctx),
        Command::Analyze(a) => commands::run::analyze(a, &ctx),
        Command::Simulate(a) => commands::run::simulate(a, &ctx),
        Command::Reproduce(a) => commands::reproduce::run(a, &ctx),
        Command::Compare(a) => commands::compare::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
