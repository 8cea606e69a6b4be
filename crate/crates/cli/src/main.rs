//! `trustsel` — trust-based model selection over time slots.
//!
//! Subcommands mirror the pipeline: `gen` and `attack` produce instances,
//! `trust` and `binarize` turn raw outputs into the binary trust matrix,
//! `select` runs one solver, `report` runs the whole pipeline, and `bench`
//! sweeps seeded instances and aggregates solver gaps.
//!
//! Exit codes: 0 success, 1 error, 2 fail-safe (some slot trusts no model).

mod bench;
mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub const EXIT_FAILSAFE: u8 = 2;

#[derive(Parser)]
#[command(name = "trustsel", version, about = "Trust-based model selection over time slots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the agreement-based trust matrix from raw outputs.
    Trust(commands::TrustArgs),
    /// Binarize raw outputs via the lambda-standard-deviations exclusion.
    Binarize(commands::BinarizeArgs),
    /// Run one solver on a binary trust matrix.
    Select(commands::SelectArgs),
    /// Apply the swap x/(100-x) percentile attack to one model's series.
    Attack(commands::AttackArgs),
    /// Generate a synthetic instance with optional poisoned models.
    Gen(commands::GenArgs),
    /// Sweep seeded instances and aggregate solver gap statistics.
    Bench(bench::BenchArgs),
    /// Full pipeline: trust, binarize, solve, and write a run report.
    Report(commands::ReportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Trust(args) => commands::run_trust(args),
        Command::Binarize(args) => commands::run_binarize(args),
        Command::Select(args) => commands::run_select(args),
        Command::Attack(args) => commands::run_attack(args),
        Command::Gen(args) => commands::run_gen(args),
        Command::Bench(args) => bench::run_bench(args),
        Command::Report(args) => commands::run_report(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
