use std::path::PathBuf;
use std::process::ExitCode;

use channel_nts::cli::{self, ScenarioConfig};
use channel_nts::nts::RunStatus;
use channel_nts::Error;
use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(version, about = "Channel input adaptation by natural type selection")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the scenario's outputs.dir
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed; overrides the scenario's seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Do not print the summary
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Channel capacity by alternating maximization
    Capacity,
    /// Deterministic iteration of the input distribution
    Iterate,
    /// Block-level feedback session, optionally with channel drift
    Simulate,
    /// Error-exponent curves along an iteration run
    Figure2,
    /// Concentration of accepted joint types
    Concentration,
}

fn emit<T: Serialize>(quiet: bool, value: &T) -> Result<(), Error> {
    if !quiet {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        println!("{text}");
    }
    Ok(())
}

fn run(args: &Args) -> Result<i32, Error> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config PATH is required".into()))?;
    let mut cfg: ScenarioConfig = cli::load_config(path)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.outputs.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    match args.command {
        Command::Capacity => emit(args.quiet, &cli::cmd_capacity(&cfg, &out)?)?,
        Command::Iterate => {
            let report = cli::cmd_iterate(&cfg, &out)?;
            emit(args.quiet, &report)?;
            if report.outcome.status == RunStatus::Infeasible {
                return Ok(cli::EXIT_INFEASIBLE);
            }
        }
        Command::Simulate => emit(args.quiet, &cli::cmd_simulate(&cfg, &out)?)?,
        Command::Figure2 => {
            let report = cli::cmd_figure2(&cfg, &out)?;
            emit(args.quiet, &report)?;
            if report.status == RunStatus::Infeasible {
                return Ok(cli::EXIT_INFEASIBLE);
            }
        }
        Command::Concentration => emit(args.quiet, &cli::cmd_concentration(&cfg, &out)?)?,
    }
    Ok(cli::EXIT_OK)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            cli::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
