//! `hetnet solve`: run one algorithm on a scenario file and emit the
//! solution as JSON.

use std::time::Instant;

use hetnet_offload::ilp::to_lp_string;
use hetnet_offload::linearize::{build_p2_feasibility, UserFixing};
use hetnet_offload::radio::build_rate_table;
use hetnet_offload::solver::{self, Solution};
use serde::Serialize;

use crate::flags::{AlgArg, SolveFlags};
use crate::util::{map_solve, read_scenario, write_text, CliError, EXIT_OK, EXIT_TIMEOUT};

#[derive(Debug, clap::Args)]
pub struct SolveArgs {
    /// Scenario JSON produced by `generate`.
    #[arg(long)]
    scenario: String,
    /// Algorithm to run.
    #[arg(long, value_enum, default_value_t = AlgArg::Optimal)]
    alg: AlgArg,
    #[command(flatten)]
    solve: SolveFlags,
    /// Output path for the solution JSON ("-" for stdout).
    #[arg(long, default_value = "-")]
    out: String,
    /// Print the bisection iterations to stderr.
    #[arg(long)]
    trace: bool,
    /// Export the joint feasibility program at the final level to this file
    /// in LP format.
    #[arg(long)]
    dump_blp: Option<String>,
}

#[derive(Serialize)]
struct SolveReport {
    runtime_s: f64,
    #[serde(flatten)]
    solution: Solution,
}

pub fn run(a: SolveArgs) -> Result<u8, CliError> {
    let s = read_scenario(&a.scenario)?;
    let opts = a.solve.to_options()?;
    let t0 = Instant::now();
    let sol = solver::solve(&s, a.alg.into(), &opts).map_err(map_solve)?;
    let runtime = t0.elapsed().as_secs_f64();

    eprintln!(
        "{}: objective {:.6e} J, level {:.6e} J, {} bisection steps, {:.3} s{}",
        a.alg.label(),
        sol.objective,
        sol.zeta,
        sol.trace.iterations.len(),
        runtime,
        if sol.timed_out { " (timed out)" } else { "" },
    );
    if a.trace {
        eprintln!("  zeta_init {:.6e}", sol.trace.zeta_init);
        for (i, it) in sol.trace.iterations.iter().enumerate() {
            eprintln!(
                "  step {i:>3}: [{:.6e}, {:.6e}] probe {:.6e} -> {} ({} nodes)",
                it.lo,
                it.hi,
                it.zeta,
                if it.feasible { "feasible" } else { "infeasible" },
                it.nodes,
            );
        }
    }

    if let Some(path) = &a.dump_blp {
        let rt = build_rate_table(&s, opts.combo_cap).map_err(crate::util::map_radio)?;
        let fixings = vec![UserFixing::Free; s.num_users()];
        let channels: Vec<usize> = (0..s.radio.num_channels).collect();
        let prog = build_p2_feasibility(&s, &rt, sol.zeta, &fixings, &channels)
            .map_err(anyhow::Error::new)?;
        write_text(path, &to_lp_string(&prog.blp))?;
    }

    let timed_out = sol.timed_out;
    let report = SolveReport { runtime_s: runtime, solution: sol };
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    write_text(&a.out, &json)?;
    Ok(if timed_out { EXIT_TIMEOUT } else { EXIT_OK })
}
