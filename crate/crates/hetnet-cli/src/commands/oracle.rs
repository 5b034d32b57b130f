//! `hetnet oracle`: exhaustive reference solve of a (tiny) scenario.

use std::time::Instant;

use hetnet_offload::model::Allocation;
use hetnet_offload::oracle::{brute_force, OracleError, DEFAULT_LEAF_CAP};
use serde::Serialize;

use crate::util::{read_scenario, write_text, CliError, EXIT_OK};

#[derive(Debug, clap::Args)]
pub struct OracleArgs {
    /// Scenario JSON produced by `generate` (keep it tiny: the search is
    /// exhaustive).
    #[arg(long)]
    scenario: String,
    /// Cap on leaf evaluations before the oracle refuses the instance.
    #[arg(long, default_value_t = DEFAULT_LEAF_CAP)]
    cap: u64,
    /// Output path for the result JSON ("-" for stdout).
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Serialize)]
struct OracleReport {
    objective: f64,
    leaves: u64,
    runtime_s: f64,
    allocation: Allocation,
}

pub fn run(a: OracleArgs) -> Result<u8, CliError> {
    let s = read_scenario(&a.scenario)?;
    let t0 = Instant::now();
    let outcome = brute_force(&s, a.cap)
        .map_err(|e| match e {
            OracleError::TooLarge { .. } => CliError::TooLarge(e.to_string()),
        })?
        .ok_or_else(|| CliError::Invalid("scenario admits no feasible allocation".into()))?;
    let runtime = t0.elapsed().as_secs_f64();

    eprintln!(
        "oracle: objective {:.6e} J, {} leaf evaluations, {:.3} s",
        outcome.objective, outcome.leaves, runtime,
    );
    let report = OracleReport {
        objective: outcome.objective,
        leaves: outcome.leaves,
        runtime_s: runtime,
        allocation: outcome.allocation,
    };
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    write_text(&a.out, &json)?;
    Ok(EXIT_OK)
}
