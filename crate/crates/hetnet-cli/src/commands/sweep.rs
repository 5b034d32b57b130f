//! `hetnet sweep`: run algorithms across an axis of generator values with
//! seed replications, emitting one row per (value, seed, algorithm) cell
//! plus per-(value, algorithm) mean rows, and optionally an SVG chart.
//!
//! Cells run on a worker pool; the output order is deterministic by cell
//! index regardless of thread count. Per-cell failures are recorded in the
//! row, not fatal.

use std::time::Instant;

use hetnet_offload::scenario::{self, GeneratorParams};
use hetnet_offload::solver::{self, Solution};
use hetnet_offload::Scenario;
use rayon::prelude::*;
use serde::Serialize;

use crate::chart::{self, Series};
use crate::flags::{AlgArg, GenFlags, SolveFlags};
use crate::util::{write_text, CliError, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Axis {
    /// Total cycles per user, axis value in Gcycles.
    ComputationLoad,
    /// Uniform bits-per-cycle ratio (the draw range collapses to the value).
    Bpc,
    /// Number of OFDMA subchannels.
    Subchannels,
    /// Independent tasks per user.
    TasksPerUser,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::ComputationLoad => "computation-load",
            Axis::Bpc => "bpc",
            Axis::Subchannels => "subchannels",
            Axis::TasksPerUser => "tasks-per-user",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Axis::ComputationLoad => "computation load (Gcycles)",
            Axis::Bpc => "bits per cycle",
            Axis::Subchannels => "subchannels",
            Axis::TasksPerUser => "tasks per user",
        }
    }

    fn default_values(self) -> Vec<f64> {
        match self {
            Axis::ComputationLoad => vec![0.1, 0.15, 0.2, 0.25, 0.3],
            Axis::Bpc => vec![1e-5, 1e-4, 5e-4, 1e-3],
            Axis::Subchannels => vec![8.0, 12.0, 16.0, 20.0, 24.0],
            Axis::TasksPerUser => vec![1.0, 2.0, 3.0, 4.0, 5.0],
        }
    }

    fn apply(self, p: &mut GeneratorParams, v: f64) -> Result<(), CliError> {
        let int = |v: f64| -> Result<usize, CliError> {
            if v.fract() == 0.0 && (1.0..=1e6).contains(&v) {
                Ok(v as usize)
            } else {
                Err(CliError::Invalid(format!(
                    "axis {} needs positive integer values, got {v}",
                    self.name()
                )))
            }
        };
        match self {
            Axis::ComputationLoad => p.total_cycles_per_user = v * 1e9,
            Axis::Bpc => p.bpc_range = (v, v),
            Axis::Subchannels => p.num_channels = int(v)?,
            Axis::TasksPerUser => p.tasks_per_user = int(v)?,
        }
        if v <= 0.0 || !v.is_finite() {
            return Err(CliError::Invalid(format!(
                "axis {} needs positive values, got {v}",
                self.name()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    JsonLines,
}

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    /// Generator knob swept across cells.
    #[arg(long, value_enum)]
    axis: Axis,
    /// Axis values, comma separated; defaults depend on the axis.
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,
    /// Replications per cell; replication r runs on seed + r.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// Base RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Algorithms to run, comma separated.
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
    /// Row output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path for the rows ("-" for stdout).
    #[arg(long, default_value = "-")]
    out: String,
    /// Write an SVG chart (mean objective per algorithm, min-max band).
    #[arg(long)]
    chart: Option<String>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    gen: GenFlags,
    #[command(flatten)]
    solve: SolveFlags,
}

/// One output row. Per-seed rows leave `objective_min`/`objective_max`
/// empty; mean rows (seed = "mean") aggregate the non-failed replications
/// and leave the per-seed-only columns empty.
#[derive(Debug, Clone, Serialize)]
struct Row {
    axis: &'static str,
    value: f64,
    seed: String,
    algorithm: &'static str,
    /// "ok", "timeout", "error" or "mean".
    status: String,
    objective: Option<f64>,
    objective_min: Option<f64>,
    objective_max: Option<f64>,
    offloaded_gcycles: Option<f64>,
    iterations: Option<u64>,
    runtime_s: Option<f64>,
    /// Weighted per-user energies in joules, ";"-joined.
    per_user_energy: String,
    error: String,
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

fn per_user_energy(s: &Scenario, sol: &Solution) -> String {
    (0..s.num_users())
        .map(|k| {
            let e = sol.allocation.energy_compute[k] + sol.allocation.energy_tx[k];
            format!("{:.6e}", s.users[k].weight * e)
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn run_cell(a: &SweepArgs, value: f64, rep: u64, alg: AlgArg) -> Row {
    let seed = a.seed + rep;
    let mut row = Row {
        axis: a.axis.name(),
        value,
        seed: seed.to_string(),
        algorithm: alg.label(),
        status: "error".into(),
        objective: None,
        objective_min: None,
        objective_max: None,
        offloaded_gcycles: None,
        iterations: None,
        runtime_s: None,
        per_user_energy: String::new(),
        error: String::new(),
    };
    let mut params = a.gen.to_params();
    if let Err(e) = a.axis.apply(&mut params, value) {
        row.error = e.to_string();
        return row;
    }
    let opts = match a.solve.to_options() {
        Ok(o) => o,
        Err(e) => {
            row.error = e.to_string();
            return row;
        }
    };
    let s = match scenario::generate(&params, seed) {
        Ok(s) => s,
        Err(e) => {
            row.error = e.to_string();
            return row;
        }
    };
    let t0 = Instant::now();
    match solver::solve(&s, alg.into(), &opts) {
        Ok(sol) => {
            row.status = if sol.timed_out { "timeout" } else { "ok" }.into();
            row.objective = Some(sol.objective);
            row.offloaded_gcycles = Some(offloaded_gcycles(&s, &sol));
            row.iterations = Some(sol.trace.iterations.len() as u64);
            row.runtime_s = Some(t0.elapsed().as_secs_f64());
            row.per_user_energy = per_user_energy(&s, &sol);
        }
        Err(e) => row.error = e.to_string(),
    }
    row
}

fn mean(xs: impl Iterator<Item = f64> + Clone) -> Option<f64> {
    let n = xs.clone().count();
    (n > 0).then(|| xs.sum::<f64>() / n as f64)
}

/// Mean row over the solved replications of one (value, algorithm) cell
/// group, or None when every replication failed.
fn aggregate(axis: Axis, value: f64, alg: AlgArg, group: &[&Row]) -> Option<Row> {
    let solved: Vec<&&Row> = group.iter().filter(|r| r.objective.is_some()).collect();
    let objs = || solved.iter().filter_map(|r| r.objective);
    Some(Row {
        axis: axis.name(),
        value,
        seed: "mean".into(),
        algorithm: alg.label(),
        status: "mean".into(),
        objective: mean(objs()),
        objective_min: objs().reduce(f64::min),
        objective_max: objs().reduce(f64::max),
        offloaded_gcycles: mean(solved.iter().filter_map(|r| r.offloaded_gcycles)),
        iterations: None,
        runtime_s: mean(solved.iter().filter_map(|r| r.runtime_s)),
        per_user_energy: String::new(),
        error: String::new(),
    })
    .filter(|r| r.objective.is_some())
}

pub fn run(a: SweepArgs) -> Result<u8, CliError> {
    let values = if a.values.is_empty() {
        a.axis.default_values()
    } else {
        a.values.clone()
    };
    if a.seeds == 0 || a.algs.is_empty() {
        return Err(CliError::Invalid(
            "need at least one replication and one algorithm".into(),
        ));
    }
    // Validate axis values and solver flags up front so misuse is an input
    // error rather than a page of failed rows.
    for &v in &values {
        a.axis.apply(&mut a.gen.to_params(), v)?;
    }
    a.solve.to_options()?;

    let mut cells: Vec<(f64, u64, AlgArg)> = Vec::new();
    for &v in &values {
        for r in 0..a.seeds {
            for &alg in &a.algs {
                cells.push((v, r, alg));
            }
        }
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = a.threads {
        pool = pool.num_threads(t.max(1));
    }
    let pool = pool.build().map_err(anyhow::Error::new)?;
    // Indexed parallel collect keeps rows ordered by cell index.
    let rows: Vec<Row> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(v, r, alg)| run_cell(&a, v, r, alg))
            .collect()
    });

    let mut all = rows.clone();
    for &v in &values {
        for &alg in &a.algs {
            let group: Vec<&Row> = rows
                .iter()
                .filter(|r| r.value == v && r.algorithm == alg.label())
                .collect();
            if let Some(m) = aggregate(a.axis, v, alg, &group) {
                all.push(m);
            }
        }
    }

    let text = match a.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &all {
                w.serialize(row).map_err(anyhow::Error::new)?;
            }
            let bytes = w.into_inner().map_err(anyhow::Error::new)?;
            String::from_utf8(bytes).expect("csv output is utf-8")
        }
        Format::JsonLines => {
            let mut out = String::new();
            for row in &all {
                out.push_str(&serde_json::to_string(row)?);
                out.push('\n');
            }
            out
        }
    };
    write_text(&a.out, &text)?;

    if let Some(path) = &a.chart {
        let series: Vec<Series> = a
            .algs
            .iter()
            .map(|&alg| Series {
                name: alg.label().to_string(),
                points: all
                    .iter()
                    .filter(|r| r.seed == "mean" && r.algorithm == alg.label())
                    .map(|r| {
                        (
                            r.value,
                            r.objective.unwrap_or(f64::NAN),
                            r.objective_min.unwrap_or(f64::NAN),
                            r.objective_max.unwrap_or(f64::NAN),
                        )
                    })
                    .collect(),
            })
            .collect();
        let svg = chart::render(a.axis.label(), "max weighted energy (J)", &series);
        write_text(path, &svg)?;
    }

    let failures = rows.iter().filter(|r| r.status == "error").count();
    if failures > 0 {
        eprintln!("sweep: {failures} of {} cells failed (see the error column)", rows.len());
    }
    Ok(EXIT_OK)
}
