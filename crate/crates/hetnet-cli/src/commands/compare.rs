//! `hetnet compare`: run several algorithms on one scenario and print a
//! comparison table with pairwise ratios and the gap of the low-complexity
//! heuristic to the optimal.

use std::time::Instant;

use hetnet_offload::solver::{self, Solution};
use hetnet_offload::Scenario;
use serde::Serialize;

use crate::flags::{AlgArg, SolveFlags};
use crate::util::{map_solve, read_scenario, write_text, CliError, EXIT_OK, EXIT_TIMEOUT};

#[derive(Debug, clap::Args)]
pub struct CompareArgs {
    /// Scenario JSON produced by `generate`.
    #[arg(long)]
    scenario: String,
    /// Algorithms to compare, comma separated.
    #[arg(
        long = "algs",
        value_enum,
        value_delimiter = ',',
        default_values_t = vec![
            AlgArg::Optimal,
            AlgArg::LowComplexity,
            AlgArg::NoOffload,
            AlgArg::FullOffload,
        ]
    )]
    algs: Vec<AlgArg>,
    #[command(flatten)]
    solve: SolveFlags,
    /// Also write the comparison as JSON to this file ("-" for stdout).
    #[arg(long)]
    out: Option<String>,
    /// Print per-user weighted energies and offloaded Gcycles.
    #[arg(long)]
    per_user: bool,
}

#[derive(Serialize)]
struct AlgReport {
    algorithm: &'static str,
    objective: f64,
    zeta: f64,
    iterations: usize,
    runtime_s: f64,
    timed_out: bool,
    offloaded_gcycles: f64,
    channels_used: usize,
    savings_vs_no_offload_pct: Option<f64>,
}

#[derive(Serialize)]
struct CompareReport {
    results: Vec<AlgReport>,
    /// `ratios[i][j]` = objective(algs[i]) / objective(algs[j]).
    ratios: Vec<Vec<f64>>,
    lc_vs_optimal_gap_pct: Option<f64>,
}

fn offloaded_gcycles(s: &Scenario, sol: &Solution) -> f64 {
    let mut cycles = 0.0;
    for (k, u) in s.users.iter().enumerate() {
        for (l, t) in u.tasks.iter().enumerate() {
            if !sol.allocation.local[k][l] {
                cycles += t.cycles;
            }
        }
    }
    cycles / 1e9
}

pub fn run(a: CompareArgs) -> Result<u8, CliError> {
    if a.algs.is_empty() {
        return Err(CliError::Invalid("need at least one algorithm".into()));
    }
    let s = read_scenario(&a.scenario)?;
    let opts = a.solve.to_options()?;

    let mut solutions: Vec<(AlgArg, Solution, f64)> = Vec::new();
    for &alg in &a.algs {
        let t0 = Instant::now();
        let sol = solver::solve(&s, alg.into(), &opts).map_err(map_solve)?;
        solutions.push((alg, sol, t0.elapsed().as_secs_f64()));
    }

    let objective_of = |wanted: AlgArg| {
        solutions
            .iter()
            .find(|(alg, ..)| *alg == wanted)
            .map(|(_, sol, _)| sol.objective)
    };
    // The no-offload objective is the natural baseline; compute it even when
    // it was not requested so savings are always reported.
    let baseline = match objective_of(AlgArg::NoOffload) {
        Some(obj) => Some(obj),
        None => solver::solve(&s, AlgArg::NoOffload.into(), &opts)
            .ok()
            .map(|sol| sol.objective),
    };

    let results: Vec<AlgReport> = solutions
        .iter()
        .map(|(alg, sol, runtime)| AlgReport {
            algorithm: alg.label(),
            objective: sol.objective,
            zeta: sol.zeta,
            iterations: sol.trace.iterations.len(),
            runtime_s: *runtime,
            timed_out: sol.timed_out,
            offloaded_gcycles: offloaded_gcycles(&s, sol),
            channels_used: (0..s.num_users()).map(|k| sol.allocation.channels_used(k)).sum(),
            savings_vs_no_offload_pct: baseline
                .map(|b| 100.0 * (1.0 - sol.objective / b)),
        })
        .collect();

    println!(
        "{:<16} {:>14} {:>12} {:>10} {:>10} {:>9}",
        "algorithm", "objective (J)", "vs no-offl", "offl Gcyc", "channels", "time (s)"
    );
    for r in &results {
        println!(
            "{:<16} {:>14.6e} {:>11} {:>10.4} {:>10} {:>9.3}{}",
            r.algorithm,
            r.objective,
            r.savings_vs_no_offload_pct
                .map_or_else(|| "-".into(), |p| format!("{:.1}%", -p + 0.0)),
            r.offloaded_gcycles,
            r.channels_used,
            r.runtime_s,
            if r.timed_out { " *timed out" } else { "" },
        );
    }

    let ratios: Vec<Vec<f64>> = results
        .iter()
        .map(|ri| results.iter().map(|rj| ri.objective / rj.objective).collect())
        .collect();
    println!("\npairwise objective ratios (row / column):");
    print!("{:<16}", "");
    for r in &results {
        print!(" {:>14}", r.algorithm);
    }
    println!();
    for (i, ri) in results.iter().enumerate() {
        print!("{:<16}", ri.algorithm);
        for v in &ratios[i] {
            print!(" {v:>14.4}");
        }
        println!();
    }

    let gap = match (objective_of(AlgArg::LowComplexity), objective_of(AlgArg::Optimal)) {
        (Some(lc), Some(opt)) if opt > 0.0 => {
            let gap = 100.0 * (lc / opt - 1.0);
            println!("\nlow-complexity vs optimal gap: {gap:+.2}%");
            Some(gap)
        }
        _ => None,
    };

    if a.per_user {
        println!("\nper-user weighted energy (J):");
        print!("{:<6}{:<6}", "user", "cell");
        for (alg, ..) in &solutions {
            print!(" {:>14}", alg.label());
        }
        println!();
        for (k, u) in s.users.iter().enumerate() {
            print!("{k:<6}{:<6}", u.cell);
            for (_, sol, _) in &solutions {
                let e = sol.allocation.energy_compute[k] + sol.allocation.energy_tx[k];
                print!(" {:>14.6e}", u.weight * e);
            }
            println!();
        }
        println!("\nper-user offloaded Gcycles:");
        print!("{:<6}{:<6}", "user", "cell");
        for (alg, ..) in &solutions {
            print!(" {:>14}", alg.label());
        }
        println!();
        for (k, u) in s.users.iter().enumerate() {
            print!("{k:<6}{:<6}", u.cell);
            for (_, sol, _) in &solutions {
                // `+ 0.0` normalizes the -0.0 an empty float sum yields.
                let gcyc: f64 = (u
                    .tasks
                    .iter()
                    .enumerate()
                    .filter(|&(l, _)| !sol.allocation.local[k][l])
                    .map(|(_, t)| t.cycles)
                    .sum::<f64>()
                    + 0.0)
                    / 1e9;
                print!(" {gcyc:>14.4}");
            }
            println!();
        }
    }

    if let Some(path) = &a.out {
        let report = CompareReport { results, ratios, lc_vs_optimal_gap_pct: gap };
        let mut json = serde_json::to_string_pretty(&report)?;
        json.push('\n');
        write_text(path, &json)?;
    }

    let timed_out = solutions.iter().any(|(_, sol, _)| sol.timed_out);
    Ok(if timed_out { EXIT_TIMEOUT } else { EXIT_OK })
}
