//! `hetnet` — scenario generation, solving and benchmarking for joint
//! computation offloading and radio resource allocation in two-tier
//! heterogeneous networks.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver timeout, 4 instance too
//! large.

mod chart;
mod commands;
mod flags;
mod util;

use std::process::ExitCode;

use clap::Parser;

#[derive(Parser)]
#[command(
    name = "hetnet",
    version,
    about = "Joint computation offloading and resource allocation in two-tier HetNets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Draw a random problem instance and write it as JSON.
    Generate(commands::generate::GenerateArgs),
    /// Solve a scenario with one algorithm.
    Solve(commands::solve::SolveArgs),
    /// Exhaustive reference solve of a tiny scenario.
    Oracle(commands::oracle::OracleArgs),
    /// Benchmark algorithms across an axis of generator values.
    Sweep(commands::sweep::SweepArgs),
    /// Run several algorithms on one scenario and compare them.
    Compare(commands::compare::CompareArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => commands::generate::run(a),
        Command::Solve(a) => commands::solve::run(a),
        Command::Oracle(a) => commands::oracle::run(a),
        Command::Sweep(a) => commands::sweep::run(a),
        Command::Compare(a) => commands::compare::run(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
