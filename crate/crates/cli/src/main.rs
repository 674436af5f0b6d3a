//! `spinal-lab`: bounds, plan optimization and simulation campaigns for
//! spinal codes, written as CSV.

mod config;
mod report;

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, Flags, Settings};
use spinal_core::bounds::{self, BoundKind};
use spinal_core::channel::ChannelModel;
use spinal_core::experiment::{self, CostRow, TrialRecord, COST_PAIRS};
use spinal_core::schedule::OptimizerState;

#[derive(Debug, Parser)]
#[command(name = "spinal-lab", version, about = "Spinal code bounds, schedules and simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Frame-error bound with uniform passes at every channel point.
    Bound,
    /// Greedy per-segment symbol allocation down to the target bound.
    Optimize,
    /// Frame-error rate with a fixed number of passes.
    Fer,
    /// Rateless throughput under the chosen scheme and decoder.
    Rate,
    /// Decoding cost of the standard scheme/decoder pairs.
    Cost,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Bound => "bound",
            Self::Optimize => "optimize",
            Self::Fer => "fer",
            Self::Rate => "rate",
            Self::Cost => "cost",
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Experiment(#[from] spinal_core::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl RunError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            _ => 3,
        }
    }
}

/// Rows computed by one subcommand, written only once the whole run succeeded.
enum Output {
    Bounds(Vec<(ChannelModel, BoundKind, f64)>),
    Optimizer(Vec<(ChannelModel, OptimizerState)>),
    Fer(Vec<TrialRecord>),
    Rate(Vec<TrialRecord>),
    Cost(Vec<CostRow>),
}

fn compute(cmd: Command, settings: &Settings) -> spinal_core::Result<Output> {
    let spec = &settings.spec;
    Ok(match cmd {
        Command::Bound => Output::Bounds(
            spec.channels
                .iter()
                .map(|ch| {
                    let kind = settings.bound.kind_for(ch);
                    let r = bounds::evaluate(kind, &spec.params, ch, spec.passes, spec.eps)?;
                    Ok((*ch, kind, r.total))
                })
                .collect::<spinal_core::Result<_>>()?,
        ),
        Command::Optimize => Output::Optimizer(experiment::run_optimizer(spec, settings.initial_passes, settings.delta)?),
        Command::Fer => Output::Fer(experiment::run_fer_experiment(spec)?),
        Command::Rate => Output::Rate(experiment::run_rate_experiment(spec)?),
        Command::Cost => Output::Cost(experiment::run_cost_experiment(spec, &COST_PAIRS)?),
    })
}

fn run(cmd: Command, settings: &Settings) -> Result<(), RunError> {
    let spec = &settings.spec;
    let output = compute(cmd, settings)?;
    let hash = report::spec_hash(cmd.name(), settings);
    let mut out = report::Sink::open(settings.out.as_deref())?;
    match &output {
        Output::Bounds(rows) => report::bounds(&mut out, spec, rows, &hash)?,
        Output::Optimizer(states) => {
            report::optimizer(&mut out, states, &hash)?;
            if let Some(path) = &settings.plan_out {
                for (idx, (ch, state)) in states.iter().enumerate() {
                    let target = if states.len() == 1 {
                        path.clone()
                    } else {
                        report::indexed_path(path, idx)
                    };
                    fs::write(&target, state.plan().to_text(&spec.params, ch)).map_err(|source| RunError::Io {
                        path: target.display().to_string(),
                        source,
                    })?;
                }
            }
        }
        Output::Fer(records) => report::fer(&mut out, spec, records, &hash)?,
        Output::Rate(records) => report::rate(&mut out, spec, records, &hash)?,
        Output::Cost(rows) => report::cost(&mut out, spec, rows, &hash)?,
    }
    out.finish()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 2 } else { 0 });
        }
    };
    let result = cli
        .flags
        .resolve()
        .map_err(RunError::from)
        .and_then(|settings| run(cli.command, &settings));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("spinal-lab {}: {err}", cli.command.name());
            ExitCode::from(err.exit_code())
        }
    }
}
