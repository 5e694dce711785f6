use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use frontlab::runner::{execute, Pipeline, Settings};

/// Fisher-KPP front experiments driven by TOML configs.
///
/// Exit status: 0 when every gate passes, 1 on a gate failure or a failed
/// run, 2 on a configuration error.
#[derive(Parser)]
#[command(name = "frontlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// experiment config (TOML)
    config: PathBuf,
    /// parent directory of the run directory
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// worker threads of the 2D solver
    #[arg(long, env = "FRONTLAB_THREADS", default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// critical wave profile and tail fit
    Wave(RunArgs),
    /// one-dimensional run: Bramson fit, drift and shape
    Run1d(RunArgs),
    /// two-dimensional scenario run with the comparison check
    Run2d(RunArgs),
    /// transverse heat flow against its closed form
    Heat(RunArgs),
    /// self-similar operators and the linear Dirichlet problem
    Dirichlet(RunArgs),
    /// a list of configs with a combined report
    Suite(RunArgs),
}

fn main() -> ExitCode {
    let (pipeline, args) = match Cli::parse().command {
        Command::Wave(a) => (Pipeline::Wave, a),
        Command::Run1d(a) => (Pipeline::Run1d, a),
        Command::Run2d(a) => (Pipeline::Run2d, a),
        Command::Heat(a) => (Pipeline::Heat, a),
        Command::Dirichlet(a) => (Pipeline::Dirichlet, a),
        Command::Suite(a) => (Pipeline::Suite, a),
    };
    let settings = Settings {
        out: args.out,
        threads: args.threads.max(1),
        expect: Some(pipeline),
    };
    ExitCode::from(execute(&args.config, &settings) as u8)
}
