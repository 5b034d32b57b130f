//! High-level solvers: bisection on the energy level with an ILP-backed
//! feasibility check per level.
//!
//! Four algorithms share one entry point:
//!
//! * `Optimal` — bisection where each level is checked by the joint
//!   linearized program, after a per-user reduction pass (users whose bit
//!   minimum is zero are pinned local; tasks the per-user minimum offloads
//!   are pinned offloaded);
//! * `LowComplexity` — the same bisection, but each level decouples the
//!   tiers: macro users first grab as few channels as possible, then the
//!   small-cell users solve the joint program on the remaining channels;
//! * `NoOffload` — closed form: everything local at each user's cheapest
//!   deadline-feasible clock;
//! * `FullOffload` — bisection with every task pinned to offloading (the
//!   upper bound is found by geometric probing first).

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{annotate, evaluate, local_energy, offloaded_bits, satisfies_c4, EvalError};
use crate::ilp::{self, BinaryLinearProgram, IlpError, IlpResult, IlpStatus};
use crate::linearize::{
    build_mue_channel_min, build_p2_feasibility, build_ps1, LinearizeError, UserFixing,
};
use crate::model::{Allocation, Scenario, User, validate_scenario};
use crate::radio::{build_rate_table, RadioError, RateTable, DEFAULT_COMBO_CAP};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid scenario: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Radio(#[from] RadioError),
    #[error(transparent)]
    Ilp(#[from] IlpError),
    #[error(transparent)]
    Linearize(#[from] LinearizeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("no feasible solution: {0}")]
    Infeasible(String),
    #[error("solver witness failed verification: {0}")]
    WitnessMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Optimal,
    LowComplexity,
    NoOffload,
    FullOffload,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Bisection stops when the level interval is narrower than this (J).
    pub epsilon: f64,
    /// Overall wall-clock budget.
    pub time_budget: Option<Duration>,
    /// Wall-clock budget per ILP solve.
    pub ilp_time_budget: Option<Duration>,
    /// Cap on precomputed rate-table entries.
    pub combo_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            epsilon: 1e-3,
            time_budget: None,
            ilp_time_budget: None,
            combo_cap: DEFAULT_COMBO_CAP,
        }
    }
}

/// One bisection step, recorded before the interval is updated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub lo: f64,
    pub hi: f64,
    pub zeta: f64,
    pub feasible: bool,
    /// Branch-and-bound nodes spent on this level's checks.
    pub nodes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BisectionTrace {
    /// Initial upper bound on the level.
    pub zeta_init: f64,
    pub iterations: Vec<IterationRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    pub algorithm: Algorithm,
    pub allocation: Allocation,
    /// Realized max weighted energy of `allocation`.
    pub objective: f64,
    /// Final upper bisection bound (equals `objective` for `NoOffload`).
    pub zeta: f64,
    pub trace: BisectionTrace,
    pub timed_out: bool,
}

/// Outcome of one feasibility check at a fixed level.
pub struct LevelCheck {
    /// A verified allocation fitting under the level, when one exists.
    pub witness: Option<Allocation>,
    pub nodes: u64,
    pub timed_out: bool,
}

/// Cheapest deadline-feasible clock for an all-local user whose weighted
/// compute energy must stay under `cap` (use infinity for no cap). Ties go
/// to the lower frequency.
fn best_local_clock(u: &User, cap: f64) -> Option<usize> {
    let xs = vec![true; u.tasks.len()];
    let mut best: Option<(f64, usize)> = None;
    for v in 0..u.clock_levels.len() {
        if !satisfies_c4(u, &xs, v) {
            continue;
        }
        let e = local_energy(u, &xs, v);
        if u.weight * e > cap {
            continue;
        }
        if best.as_ref().is_none_or(|&(b, _)| e < b) {
            best = Some((e, v));
        }
    }
    best.map(|(_, v)| v)
}

/// All-local solution at each user's cheapest feasible clock; the natural
/// initial upper bound for the bisection.
fn all_local_best(s: &Scenario) -> Result<(Allocation, f64), SolveError> {
    let clocks = s
        .users
        .iter()
        .enumerate()
        .map(|(k, u)| {
            best_local_clock(u, f64::INFINITY)
                .ok_or_else(|| SolveError::Invalid(vec![format!("user {k}: no feasible clock level")]))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut a = Allocation::all_local(s, clocks);
    let ev = annotate(s, &mut a)?;
    Ok((a, ev.objective))
}

enum Reduction {
    Fixings(Vec<UserFixing>),
    Infeasible,
    Timeout,
}

/// Per-user reduction at level `zeta`: solve the bit-minimization program
/// for each user and turn its answer into a fixing.
fn reduce_users(
    s: &Scenario,
    zeta: f64,
    budget: Option<Duration>,
    nodes: &mut u64,
) -> Result<Reduction, SolveError> {
    let mut fixings = Vec::with_capacity(s.num_users());
    for (k, u) in s.users.iter().enumerate() {
        let prog = build_ps1(u, zeta);
        let r = ilp::solve(&prog.blp, budget)?;
        *nodes += r.nodes;
        match r.status {
            IlpStatus::Infeasible => return Ok(Reduction::Infeasible),
            IlpStatus::Timeout => return Ok(Reduction::Timeout),
            IlpStatus::Optimal => {}
        }
        let bits_zero = r.objective <= 1e-9 * (1.0 + u.total_bits());
        if bits_zero {
            // Tolerate the ILP's row slack when re-picking the clock.
            match best_local_clock(u, zeta * (1.0 + 1e-6) + 1e-12) {
                Some(v) => fixings.push(UserFixing::Local { clock: v }),
                None => {
                    return Err(SolveError::WitnessMismatch(format!(
                        "user {k}: bit minimum is zero but no clock fits under {zeta}"
                    )))
                }
            }
        } else {
            let (xs, _) = prog.decode(r.assignment.as_ref().unwrap());
            fixings.push(UserFixing::Offloading {
                forced_offload: xs.iter().map(|&b| !b).collect(),
            });
        }
    }
    Ok(Reduction::Fixings(fixings))
}

/// Run the ILP engine, counting nodes. Numerical failures inside the LP
/// backend are downgraded to a timeout so one ill-conditioned level leaves
/// the bisection with its current bracket instead of aborting the solve.
fn run_blp(
    p: &BinaryLinearProgram,
    budget: Option<Duration>,
    nodes: &mut u64,
) -> Result<IlpResult, SolveError> {
    match ilp::solve(p, budget) {
        Ok(r) => {
            *nodes += r.nodes;
            Ok(r)
        }
        Err(IlpError::Solver(_)) => Ok(IlpResult {
            status: IlpStatus::Timeout,
            assignment: None,
            objective: f64::NAN,
            nodes: 0,
        }),
        Err(e) => Err(e.into()),
    }
}

fn verified(s: &Scenario, zeta: f64, a: Allocation) -> Result<Allocation, SolveError> {
    let ev = evaluate(s, &a)?;
    if ev.feasible_at(zeta * (1.0 + 1e-6) + 1e-12) {
        Ok(a)
    } else {
        Err(SolveError::WitnessMismatch(format!(
            "objective {} against level {zeta}, violations {:?}",
            ev.objective, ev.violations
        )))
    }
}

/// Check whether level `zeta` is achievable under the given algorithm and
/// produce a verified witness when it is.
pub fn check_level(
    s: &Scenario,
    rt: &RateTable,
    zeta: f64,
    alg: Algorithm,
    ilp_budget: Option<Duration>,
) -> Result<LevelCheck, SolveError> {
    let mut nodes = 0u64;
    let infeasible = |nodes| Ok(LevelCheck { witness: None, nodes, timed_out: false });
    let timeout = |nodes| Ok(LevelCheck { witness: None, nodes, timed_out: true });
    let all_channels: Vec<usize> = (0..s.radio.num_channels).collect();

    // Contention-free lower bound: if some user cannot reach `zeta` even
    // with every channel to itself, the level is infeasible outright. The
    // margin matches the slack `verified` grants a witness.
    if alg != Algorithm::NoOffload
        && standalone_floor(s, rt, alg == Algorithm::FullOffload) > zeta * (1.0 + 1e-6) + 1e-12
    {
        return infeasible(nodes);
    }

    let fixings = match alg {
        Algorithm::FullOffload => s
            .users
            .iter()
            .map(|u| UserFixing::Offloading { forced_offload: vec![true; u.tasks.len()] })
            .collect(),
        Algorithm::Optimal | Algorithm::LowComplexity => {
            match reduce_users(s, zeta, ilp_budget, &mut nodes)? {
                Reduction::Fixings(f) => f,
                Reduction::Infeasible => return infeasible(nodes),
                Reduction::Timeout => return timeout(nodes),
            }
        }
        Algorithm::NoOffload => {
            let ok = s
                .users
                .iter()
                .all(|u| best_local_clock(u, zeta * (1.0 + 1e-9)).is_some());
            if !ok {
                return infeasible(nodes);
            }
            let clocks: Vec<usize> = s
                .users
                .iter()
                .map(|u| best_local_clock(u, zeta * (1.0 + 1e-9)).unwrap())
                .collect();
            let a = Allocation::all_local(s, clocks);
            return Ok(LevelCheck { witness: Some(verified(s, zeta, a)?), nodes, timed_out: false });
        }
    };

    if fixings.iter().all(|f| matches!(f, UserFixing::Local { .. })) {
        let clocks: Vec<usize> = fixings
            .iter()
            .map(|f| match f {
                UserFixing::Local { clock } => *clock,
                _ => unreachable!(),
            })
            .collect();
        let a = Allocation::all_local(s, clocks);
        return Ok(LevelCheck { witness: Some(verified(s, zeta, a)?), nodes, timed_out: false });
    }

    match alg {
        Algorithm::Optimal => {
            // The decoupled construction is far cheaper than the joint
            // program, and any witness it finds also witnesses the joint
            // feasibility; only when it fails is the joint program needed.
            if let Decoupled::Witness(a) = decoupled(s, rt, zeta, &fixings, ilp_budget, &mut nodes)?
            {
                return Ok(LevelCheck { witness: Some(verified(s, zeta, a)?), nodes, timed_out: false });
            }
            let prog = build_p2_feasibility(s, rt, zeta, &fixings, &all_channels)?;
            let r = run_blp(&prog.blp, ilp_budget, &mut nodes)?;
            match r.status {
                IlpStatus::Infeasible => infeasible(nodes),
                IlpStatus::Timeout => timeout(nodes),
                IlpStatus::Optimal => {
                    let a = prog.decode(s, &fixings, r.assignment.as_ref().unwrap());
                    Ok(LevelCheck { witness: Some(verified(s, zeta, a)?), nodes, timed_out: false })
                }
            }
        }
        Algorithm::FullOffload => {
            let prog = build_p2_feasibility(s, rt, zeta, &fixings, &all_channels)?;
            let r = run_blp(&prog.blp, ilp_budget, &mut nodes)?;
            match r.status {
                IlpStatus::Infeasible => infeasible(nodes),
                IlpStatus::Timeout => timeout(nodes),
                IlpStatus::Optimal => {
                    let a = prog.decode(s, &fixings, r.assignment.as_ref().unwrap());
                    Ok(LevelCheck { witness: Some(verified(s, zeta, a)?), nodes, timed_out: false })
                }
            }
        }
        Algorithm::LowComplexity => {
            match decoupled(s, rt, zeta, &fixings, ilp_budget, &mut nodes)? {
                Decoupled::Witness(a) => {
                    Ok(LevelCheck { witness: Some(verified(s, zeta, a)?), nodes, timed_out: false })
                }
                Decoupled::Infeasible => infeasible(nodes),
                Decoupled::Undecided => timeout(nodes),
            }
        }
        Algorithm::NoOffload => unreachable!("handled above"),
    }
}

/// Largest per-user standalone energy floor: the minimum weighted energy
/// each user could reach if it were given every channel to itself (SUEs at
/// their best combo rate, so interference only lowers it further). Any
/// level below the largest floor is infeasible regardless of contention,
/// which settles the low side of the bisection without touching the ILP.
fn standalone_floor(s: &Scenario, rt: &RateTable, full_offload: bool) -> f64 {
    let mut worst = 0.0f64;
    for (k, u) in s.users.iter().enumerate() {
        // Best per-channel rate the user could see, sorted descending.
        let mut rates: Vec<f64> = (0..s.radio.num_channels)
            .map(|n| {
                if let Some(i) = rt.mue_pos(k) {
                    rt.mue_rate[i][n]
                } else {
                    let slot = u.cell - 1;
                    rt.combos_of(k)
                        .into_iter()
                        .map(|c| rt.sue_rate[n][c][slot])
                        .fold(0.0, f64::max)
                }
            })
            .collect();
        rates.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let pw = s.radio.total_power(u.cell) * s.radio.bandwidth;

        let n_tasks = u.tasks.len();
        let mut floor = f64::INFINITY;
        for mask in 0..(1u32 << n_tasks) {
            if full_offload && mask != 0 {
                break;
            }
            let xs: Vec<bool> = (0..n_tasks).map(|l| mask & (1 << l) != 0).collect();
            let bits = offloaded_bits(u, &xs);
            let e_t_min = if bits == 0.0 {
                0.0
            } else {
                let mut best = f64::INFINITY;
                let mut sum = 0.0;
                for (i, &r) in rates.iter().enumerate() {
                    sum += r;
                    if sum <= 0.0 {
                        continue;
                    }
                    let t = bits / sum;
                    if t <= u.tau2 * (1.0 + 1e-9) {
                        best = best.min(t * pw * (i + 1) as f64);
                    }
                }
                best
            };
            if !e_t_min.is_finite() {
                continue;
            }
            for v in 0..u.clock_levels.len() {
                if satisfies_c4(u, &xs, v) {
                    floor = floor.min(local_energy(u, &xs, v) + e_t_min);
                }
            }
        }
        if floor.is_finite() {
            worst = worst.max(u.weight * floor);
        }
        // A user with no standalone option at all cannot tighten the bound
        // soundly here; the per-level programs will report it.
    }
    worst
}

/// Above this size the macro channel-minimization program is not attempted
/// with the ILP engine; the greedy construction is used directly.
const STAGE1_ILP_VAR_CAP: usize = 2500;

/// Greedy replacement for the macro channel-minimization stage: each active
/// macro user offloads exactly its pinned tasks, runs the cheapest
/// deadline-feasible clock for the rest, and claims its fastest still-free
/// channels one by one until both the transmit deadline and the energy
/// level hold. Users with more offloaded bits pick first. Returns `None`
/// when some user cannot be served, which leaves the level undecided (the
/// construction is heuristic, not a proof of infeasibility).
fn greedy_mue_stage1(
    s: &Scenario,
    rt: &RateTable,
    zeta: f64,
    fixings: &[UserFixing],
    mue_active: &[usize],
) -> Option<Allocation> {
    let mut alloc = Allocation::all_local(s, vec![0; s.num_users()]);
    let mut taken = vec![false; s.radio.num_channels];

    let mut order: Vec<usize> = mue_active.to_vec();
    let bits_of = |k: usize| -> f64 {
        let u = &s.users[k];
        let xs: Vec<bool> = match &fixings[k] {
            UserFixing::Offloading { forced_offload } => {
                forced_offload.iter().map(|&f| !f).collect()
            }
            _ => vec![true; u.tasks.len()],
        };
        offloaded_bits(u, &xs)
    };
    order.sort_by(|&a, &b| bits_of(b).partial_cmp(&bits_of(a)).unwrap());

    for &k in &order {
        let u = &s.users[k];
        let xs: Vec<bool> = match &fixings[k] {
            UserFixing::Offloading { forced_offload } => {
                forced_offload.iter().map(|&f| !f).collect()
            }
            _ => vec![true; u.tasks.len()],
        };
        let (e_c, clock) = (0..u.clock_levels.len())
            .filter(|&v| satisfies_c4(u, &xs, v))
            .map(|v| (local_energy(u, &xs, v), v))
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())?;
        let bits = offloaded_bits(u, &xs);
        if bits > 0.0 {
            let i = rt.mue_pos(k)?;
            let mut cand: Vec<usize> = (0..s.radio.num_channels).filter(|&n| !taken[n]).collect();
            cand.sort_by(|&a, &b| rt.mue_rate[i][b].partial_cmp(&rt.mue_rate[i][a]).unwrap());
            let pw = s.radio.total_power(u.cell) * s.radio.bandwidth;
            let mut rate_sum = 0.0;
            let mut chosen: Vec<usize> = Vec::new();
            let mut served = false;
            for n in cand {
                chosen.push(n);
                rate_sum += rt.mue_rate[i][n];
                if rate_sum <= 0.0 {
                    continue;
                }
                let t = bits / rate_sum;
                let e_t = t * pw * chosen.len() as f64;
                if t <= u.tau2 && u.weight * (e_c + e_t) <= zeta {
                    served = true;
                    break;
                }
            }
            if !served {
                return None;
            }
            for &n in &chosen {
                taken[n] = true;
                alloc.channels[k][n] = true;
            }
        } else if u.weight * e_c > zeta {
            return None;
        }
        alloc.local[k] = xs;
        alloc.clock[k] = clock;
    }
    Some(alloc)
}

enum Decoupled {
    Witness(Allocation),
    /// The decoupled construction admits no solution at this level (the
    /// joint program still might).
    Infeasible,
    /// A stage ran out of budget before deciding.
    Undecided,
}

/// The tier-decoupled construction: macro users first take as few channels
/// as possible, then the small-cell users solve the joint program on the
/// remaining channels. When the channel-minimization stage runs out of
/// budget but holds an incumbent, that (possibly non-minimal) assignment is
/// used so the level can still be decided.
fn decoupled(
    s: &Scenario,
    rt: &RateTable,
    zeta: f64,
    fixings: &[UserFixing],
    ilp_budget: Option<Duration>,
    nodes: &mut u64,
) -> Result<Decoupled, SolveError> {
    let all_channels: Vec<usize> = (0..s.radio.num_channels).collect();
    let mue_active: Vec<usize> = s
        .mues()
        .into_iter()
        .filter(|&k| !matches!(fixings[k], UserFixing::Local { .. }))
        .collect();
    let merged_clocks: Vec<usize> = fixings
        .iter()
        .map(|f| match f {
            UserFixing::Local { clock } => *clock,
            _ => 0,
        })
        .collect();
    let mue_alloc = if mue_active.is_empty() {
        None
    } else {
        let prog = build_mue_channel_min(s, rt, zeta, fixings, &all_channels)?;
        // Past a few thousand variables the channel-minimization program
        // rarely produces an incumbent within a per-level budget, so go
        // straight to the greedy construction instead of burning it.
        if prog.blp.num_vars() > STAGE1_ILP_VAR_CAP {
            match greedy_mue_stage1(s, rt, zeta, fixings, &mue_active) {
                Some(a) => Some(a),
                None => return Ok(Decoupled::Undecided),
            }
        } else {
            let r = run_blp(&prog.blp, ilp_budget, nodes)?;
            match (r.status, &r.assignment) {
                (IlpStatus::Infeasible, _) => return Ok(Decoupled::Infeasible),
                (IlpStatus::Timeout, None) => {
                    match greedy_mue_stage1(s, rt, zeta, fixings, &mue_active) {
                        Some(a) => Some(a),
                        None => return Ok(Decoupled::Undecided),
                    }
                }
                (IlpStatus::Optimal | IlpStatus::Timeout, Some(a)) => {
                    Some(prog.decode(s, fixings, a))
                }
                (IlpStatus::Optimal, None) => unreachable!("optimal without assignment"),
            }
        }
    };
    let mue_channels: Vec<bool> = (0..s.radio.num_channels)
        .map(|n| {
            mue_alloc
                .as_ref()
                .is_some_and(|a| mue_active.iter().any(|&k| a.channels[k][n]))
        })
        .collect();

    // Stage 2: SUEs solve the joint program on what is left.
    let sue_channels: Vec<usize> = (0..s.radio.num_channels)
        .filter(|&n| !mue_channels[n])
        .collect();
    let sue_active = s
        .users
        .iter()
        .enumerate()
        .any(|(k, u)| !u.is_mue() && !matches!(fixings[k], UserFixing::Local { .. }));
    let mut merged = if sue_active {
        let mut stage2 = fixings.to_vec();
        for &k in &mue_active {
            stage2[k] = UserFixing::Local { clock: 0 }; // placeholder; overwritten below
        }
        let prog = build_p2_feasibility(s, rt, zeta, &stage2, &sue_channels)?;
        let r = run_blp(&prog.blp, ilp_budget, nodes)?;
        match r.status {
            IlpStatus::Infeasible => return Ok(Decoupled::Infeasible),
            IlpStatus::Timeout => return Ok(Decoupled::Undecided),
            IlpStatus::Optimal => prog.decode(s, &stage2, r.assignment.as_ref().unwrap()),
        }
    } else {
        Allocation::all_local(s, merged_clocks)
    };
    if let Some(ma) = mue_alloc {
        for &k in &mue_active {
            merged.local[k] = ma.local[k].clone();
            merged.clock[k] = ma.clock[k];
            merged.channels[k] = ma.channels[k].clone();
        }
    }
    Ok(Decoupled::Witness(merged))
}

fn sub_budget(opts: &SolveOptions, start: Instant) -> Option<Duration> {
    let remaining = opts
        .time_budget
        .map(|b| b.saturating_sub(start.elapsed()));
    match (opts.ilp_time_budget, remaining) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (Some(a), None) => Some(a),
        (None, r) => r,
    }
}

fn out_of_time(opts: &SolveOptions, start: Instant) -> bool {
    opts.time_budget.is_some_and(|b| start.elapsed() >= b)
}

/// Solve a scenario with the chosen algorithm.
pub fn solve(s: &Scenario, alg: Algorithm, opts: &SolveOptions) -> Result<Solution, SolveError> {
    let errs = validate_scenario(s);
    if !errs.is_empty() {
        return Err(SolveError::Invalid(errs));
    }
    let start = Instant::now();
    let (all_local, all_local_level) = all_local_best(s)?;

    if alg == Algorithm::NoOffload {
        return Ok(Solution {
            algorithm: alg,
            objective: all_local_level,
            zeta: all_local_level,
            allocation: all_local,
            trace: BisectionTrace { zeta_init: all_local_level, iterations: Vec::new() },
            timed_out: false,
        });
    }

    let rt = build_rate_table(s, opts.combo_cap)?;

    // Establish an initial feasible upper bound.
    let (mut witness, mut hi, mut lo, mut timed_out) = if alg == Algorithm::FullOffload {
        let mut level = all_local_level.max(opts.epsilon);
        let mut found = None;
        let mut lo = 0.0;
        for probe in 0..60 {
            if out_of_time(opts, start) {
                break;
            }
            let chk = check_level(s, &rt, level, alg, sub_budget(opts, start))?;
            if let Some(w) = chk.witness {
                found = Some(w);
                if probe > 0 {
                    lo = level / 2.0;
                }
                break;
            }
            level *= 2.0;
        }
        match found {
            Some(w) => (w, level, lo, false),
            None => {
                return Err(SolveError::Infeasible(
                    "no level admits offloading every task within the deadlines".into(),
                ))
            }
        }
    } else {
        (all_local, all_local_level, 0.0, false)
    };

    let zeta_init = hi;
    let mut iterations = Vec::new();
    while hi - lo > opts.epsilon {
        if out_of_time(opts, start) {
            timed_out = true;
            break;
        }
        let zeta = 0.5 * (lo + hi);
        let chk = check_level(s, &rt, zeta, alg, sub_budget(opts, start))?;
        if chk.timed_out {
            timed_out = true;
            break;
        }
        iterations.push(IterationRecord {
            lo,
            hi,
            zeta,
            feasible: chk.witness.is_some(),
            nodes: chk.nodes,
        });
        match chk.witness {
            Some(w) => {
                hi = zeta;
                witness = w;
            }
            None => lo = zeta,
        }
    }

    let mut allocation = witness;
    let ev = annotate(s, &mut allocation)?;
    Ok(Solution {
        algorithm: alg,
        objective: ev.objective,
        zeta: hi,
        allocation,
        trace: BisectionTrace { zeta_init, iterations },
        timed_out,
    })
}
