//! `gpas` command-line front end.
//!
//! Standard output carries only the machine-readable payload; progress goes
//! to standard error. Exit codes: 0 success, 1 validation failure, 2 usage or
//! domain error, 3 runtime budget exhausted.

pub mod commands;
pub mod format;
pub mod validate;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use gpas_core::gpas::DEFAULT_MAX_CALLS;
use gpas_core::Error as CoreError;

pub use format::OutputFormat;

/// Environment variable that overrides the default seed of 0.
pub const SEED_ENV: &str = "GPAS_SEED";

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("failed to write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(
                CoreError::BudgetExceeded { .. }
                | CoreError::IterationCap(_)
                | CoreError::DegenerateRatio { .. },
            ) => EXIT_BUDGET,
            CliError::Io(_) => 1,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gpas", version, about = "Poisson mean estimation with exactly known relative error")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// RNG seed (default 0, or the value of GPAS_SEED).
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Write the payload here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Smallest k (and mixing probability p) giving failure probability exactly delta.
    Calibrate {
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// One estimator run on a synthetic Poisson(mu) source.
    Estimate {
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
        delta: f64,
        /// Fixed arrival index; skips calibration.
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        k: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_MAX_CALLS)]
        max_calls: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Statistical self-check; exit 1 if any property fails.
    Validate {
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Two-phase TPA estimate of Z(1)/Z(0) for a small Ising model.
    TpaIsing {
        #[arg(long, required_unless_present = "edges", conflicts_with = "edges")]
        width: Option<usize>,
        #[arg(long, required_unless_present = "edges", conflicts_with = "edges")]
        height: Option<usize>,
        /// Edge-list file: one "u v" pair per line, 0-indexed.
        #[arg(long)]
        edges: Option<PathBuf>,
        /// Vertex count for --edges (default: largest index + 1).
        #[arg(long, requires = "edges")]
        vertices: Option<usize>,
        #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        replicates: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_CALLS)]
        max_calls: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Mean call count of the two-phase scheme against a Chernoff fixed-sample arm.
    Bench {
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_CALLS)]
        max_calls: u64,
        #[command(flatten)]
        common: Common,
    },
}

/// Rendered payload plus the exit code it should produce.
pub struct Outcome {
    pub payload: String,
    pub output: Option<PathBuf>,
    pub exit_code: i32,
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    use commands::*;
    let ok = |payload: String, output: Option<PathBuf>| Outcome {
        payload,
        output,
        exit_code: 0,
    };
    match cli.command {
        Command::Calibrate {
            epsilon,
            delta,
            format,
            output,
        } => Ok(ok(format::render(&cmd_calibrate(epsilon, delta)?, format), output)),
        Command::Estimate {
            mu,
            epsilon,
            delta,
            k,
            max_calls,
            common,
        } => {
            let out = cmd_estimate(&EstimateArgs {
                mu,
                epsilon,
                delta,
                k,
                seed: common.seed,
                max_calls,
            })?;
            Ok(ok(format::render(&out, common.format), common.output))
        }
        Command::Validate { replicates, common } => {
            let out = validate::cmd_validate(replicates, common.seed)?;
            let exit_code = if out.all_passed { 0 } else { EXIT_VALIDATION };
            Ok(Outcome {
                payload: format::render(&out, common.format),
                output: common.output,
                exit_code,
            })
        }
        Command::TpaIsing {
            width,
            height,
            edges,
            vertices,
            epsilon,
            delta,
            replicates,
            max_calls,
            common,
        } => {
            let graph = match (edges, width, height) {
                (Some(path), _, _) => GraphSpec::EdgeList { path, vertices },
                (None, Some(width), Some(height)) => GraphSpec::Grid { width, height },
                _ => return Err(CliError::Usage("give --width and --height, or --edges".into())),
            };
            let out = cmd_tpa_ising(&TpaIsingArgs {
                graph,
                epsilon,
                delta,
                seed: common.seed,
                replicates,
                max_calls,
            })?;
            Ok(ok(format::render(&out, common.format), common.output))
        }
        Command::Bench {
            epsilon,
            delta,
            mu,
            replicates,
            max_calls,
            common,
        } => {
            let out = cmd_bench(&BenchArgs {
                epsilon,
                delta,
                mu,
                replicates,
                seed: common.seed,
                max_calls,
            })?;
            Ok(ok(format::render(&out, common.format), common.output))
        }
    }
}
