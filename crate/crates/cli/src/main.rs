//! `fpp`: run first-passage percolation experiments and the acceptance suite.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Overrides};
use fpp_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "fpp",
    version,
    about = "First-passage percolation on the complete graph"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distance between two fixed vertices.
    TwoPoint(Overrides),
    /// Largest distance from a fixed vertex.
    Flooding(Overrides),
    /// Weighted diameter.
    Diameter(Overrides),
    /// Hopcounts of shortest paths.
    Hopcount(Overrides),
    /// Joint distances among m tagged vertices.
    Joint(Overrides),
    /// Number of vertices with large minimal edge weight.
    PoissonCheck(Overrides),
    /// Draws of the limiting variable Xi.
    Xi(Overrides),
    /// Tail of Q by three estimators.
    QTail(Overrides),
    /// Mean and variance of Xi.
    Moments(Overrides),
    /// Run the acceptance suite.
    Verify(Overrides),
}

impl Command {
    fn parts(&self) -> (&'static str, &Overrides) {
        match self {
            Command::TwoPoint(o) => ("two-point", o),
            Command::Flooding(o) => ("flooding", o),
            Command::Diameter(o) => ("diameter", o),
            Command::Hopcount(o) => ("hopcount", o),
            Command::Joint(o) => ("joint", o),
            Command::PoissonCheck(o) => ("poisson-check", o),
            Command::Xi(o) => ("xi", o),
            Command::QTail(o) => ("q-tail", o),
            Command::Moments(o) => ("moments", o),
            Command::Verify(o) => ("verify", o),
        }
    }
}

const EXIT_ACCEPTANCE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::BudgetExceeded(_) | Error::Unstable { .. } => EXIT_BUDGET,
        Error::InvalidParameter { .. }
        | Error::VertexOutOfRange { .. }
        | Error::SelfLoop(_)
        | Error::EmptyInput(_) => EXIT_CONFIG,
        Error::NonMonotoneCdf { .. } => EXIT_ACCEPTANCE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, flags) = cli.command.parts();
    let mut config = match ExperimentConfig::resolve(flags) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if name == "verify" && !config.seed_given {
        config.seed = fpp_core::acceptance::DEFAULT_SEED;
    }
    if config.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build_global()
        {
            eprintln!("error: cannot start {} workers: {e}", config.workers);
            return ExitCode::from(EXIT_CONFIG);
        }
    }

    let started = Instant::now();
    let outcome = match commands::run(name, &config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    for line in &outcome.lines {
        println!("{line}");
    }
    let wall_seconds = started.elapsed().as_secs_f64();
    if let Err(e) = output::write(name, &config, &outcome, wall_seconds) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    let _ = std::io::stdout().flush();
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ACCEPTANCE)
    }
}
