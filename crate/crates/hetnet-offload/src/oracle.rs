//! Exhaustive reference solvers, kept deliberately independent of the rate
//! tables, the linearization and the ILP engine: all physics is recomputed
//! here from the raw scenario data.
//!
//! The joint search space factors cleanly: once every channel is assigned
//! (idle, one macro user, or one co-channel SUE pattern), each user's rate
//! is fixed and its placement/clock choice is an independent minimization.
//! The oracle therefore enumerates channel assignments exhaustively and
//! solves each user's inner problem by scanning all (placement, clock)
//! pairs, which keeps instances with a few million leaf evaluations exact
//! and affordable.

use thiserror::Error;

use crate::ilp::{BinaryLinearProgram, Sense};
use crate::model::{Allocation, Scenario};

/// Default cap on the number of leaf evaluations.
pub const DEFAULT_LEAF_CAP: u64 = 100_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle would perform {leaves:.3e} leaf evaluations, above the cap of {cap}")]
    TooLarge { leaves: f64, cap: u64 },
}

#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub allocation: Allocation,
    /// max over users of `weight * (compute + transmit energy)`.
    pub objective: f64,
    /// Leaf evaluations performed: per-user (placement, clock) scans summed
    /// over all channel assignments examined.
    pub leaves: u64,
}

/// Relative feasibility slack on deadline comparisons, mirroring the main
/// evaluator so both sides accept the same boundary points.
const REL_TOL: f64 = 1e-9;

/// One way to use a single channel.
#[derive(Clone)]
struct ChannelOption {
    /// Users transmitting under this option with their achieved rate on the
    /// channel (interference already folded in).
    users: Vec<(usize, f64)>,
}

/// Per-user precomputation independent of the channel assignment.
struct UserInner {
    /// For every placement mask: (local flags, offloaded bits, local cycles).
    masks: Vec<(Vec<bool>, f64, f64)>,
    /// For every clock level: energy per cycle (0 at the idle level).
    coeff: Vec<f64>,
    clock_hz: Vec<f64>,
    weight: f64,
    tau1: f64,
    tau2: f64,
    /// Circuit-plus-transmit power density times bandwidth, W/Hz * Hz.
    pw: f64,
}

fn user_inner(s: &Scenario, k: usize, full_offload: bool) -> UserInner {
    let u = &s.users[k];
    let n_tasks = u.tasks.len();
    let all_masks: Vec<u32> = if full_offload {
        vec![0]
    } else {
        (0..(1u32 << n_tasks)).collect()
    };
    let masks = all_masks
        .into_iter()
        .map(|mask| {
            let flags: Vec<bool> = (0..n_tasks).map(|l| mask & (1 << l) != 0).collect();
            let mut bits = 0.0;
            let mut cycles = 0.0;
            for (l, t) in u.tasks.iter().enumerate() {
                if flags[l] {
                    cycles += t.cycles;
                } else {
                    bits += t.bits;
                }
            }
            (flags, bits, cycles)
        })
        .collect();
    let coeff = u
        .clock_levels
        .iter()
        .map(|&f| if f > 0.0 { (u.beta1 * f.powf(u.beta2) + u.beta3) / f } else { 0.0 })
        .collect();
    UserInner {
        masks,
        coeff,
        clock_hz: u.clock_levels.clone(),
        weight: u.weight,
        tau1: u.tau1,
        tau2: u.tau2,
        pw: 1.5 * s.radio.tx_power(u.cell) * s.radio.bandwidth,
    }
}

/// Best weighted energy for one user at a fixed rate/channel count, scanning
/// every (placement, clock) pair. Returns the winning indices as well.
fn best_inner(inner: &UserInner, rate: f64, count: usize) -> Option<(f64, usize, usize)> {
    let mut best: Option<(f64, usize, usize)> = None;
    for (mi, (_, bits, cycles)) in inner.masks.iter().enumerate() {
        let (t, e_t) = if *bits == 0.0 {
            (0.0, 0.0)
        } else if rate <= 0.0 {
            continue;
        } else {
            let t = bits / rate;
            (t, t * inner.pw * count as f64)
        };
        if t > inner.tau2 * (1.0 + REL_TOL) {
            continue;
        }
        for (v, &f) in inner.clock_hz.iter().enumerate() {
            let e_c = if *cycles == 0.0 {
                0.0
            } else if f <= 0.0 {
                continue;
            } else {
                if cycles / f > inner.tau1 * (1.0 + REL_TOL) {
                    continue;
                }
                inner.coeff[v] * cycles
            };
            let e = inner.weight * (e_c + e_t);
            if best.as_ref().is_none_or(|&(b, _, _)| e < b) {
                best = Some((e, mi, v));
            }
        }
    }
    best
}

/// Enumerate the ways one channel can be used. Option 0 is always "idle";
/// macro users follow in ascending order; SUE co-channel patterns last, in
/// odometer order over (idle + SUEs) per small cell.
fn channel_options(s: &Scenario, n: usize) -> Vec<ChannelOption> {
    let r = &s.radio;
    let mut opts = vec![ChannelOption { users: Vec::new() }];
    for k in s.mues() {
        let gamma = r.pt_macro * r.gains[k][0][n] / r.noise_density;
        let rate = r.bandwidth * (1.0 + gamma).log2();
        opts.push(ChannelOption { users: vec![(k, rate)] });
    }
    let cells = s.topology.num_small_cells();
    if cells == 0 {
        return opts;
    }
    let per_cell: Vec<Vec<Option<usize>>> = (1..=cells)
        .map(|m| {
            std::iter::once(None)
                .chain(s.cell_users(m).into_iter().map(Some))
                .collect()
        })
        .collect();
    let mut idx = vec![0usize; cells];
    loop {
        // Advance the odometer first so the all-idle pattern (already
        // covered by option 0) is skipped.
        let mut pos = cells;
        loop {
            if pos == 0 {
                return opts;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < per_cell[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
        let occupants: Vec<Option<usize>> =
            (0..cells).map(|m| per_cell[m][idx[m]]).collect();
        let mut users = Vec::new();
        for (slot, occ) in occupants.iter().enumerate() {
            if let Some(k) = *occ {
                let m = slot + 1;
                let interference: f64 = occupants
                    .iter()
                    .enumerate()
                    .filter(|&(s2, o)| s2 != slot && o.is_some())
                    .map(|(_, o)| r.pt_sc * r.gains[o.unwrap()][m][n])
                    .sum();
                let gamma = r.pt_sc * r.gains[k][m][n] / (interference + r.noise_density);
                users.push((k, r.bandwidth * (1.0 + gamma).log2()));
            }
        }
        opts.push(ChannelOption { users });
    }
}

fn search(s: &Scenario, cap: u64, full_offload: bool) -> Result<Option<OracleOutcome>, OracleError> {
    let n = s.radio.num_channels;
    let k_all = s.num_users();
    let options: Vec<Vec<ChannelOption>> = (0..n).map(|ch| channel_options(s, ch)).collect();

    let inner: Vec<UserInner> = (0..k_all).map(|k| user_inner(s, k, full_offload)).collect();
    let per_leaf: u64 = inner
        .iter()
        .map(|i| (i.masks.len() * i.clock_hz.len()) as u64)
        .sum();
    let assignments: f64 = options.iter().map(|o| o.len() as f64).product();
    let predicted = assignments * per_leaf as f64;
    if predicted > cap as f64 {
        return Err(OracleError::TooLarge { leaves: predicted, cap });
    }

    let mut leaves: u64 = 0;
    let mut best: Option<(f64, Vec<usize>, Vec<(usize, usize)>)> = None;
    let mut idx = vec![0usize; n];
    let mut rates = vec![0.0f64; k_all];
    let mut counts = vec![0usize; k_all];
    'outer: loop {
        for r in rates.iter_mut() {
            *r = 0.0;
        }
        for c in counts.iter_mut() {
            *c = 0;
        }
        for (ch, &o) in idx.iter().enumerate() {
            for &(k, r) in &options[ch][o].users {
                rates[k] += r;
                counts[k] += 1;
            }
        }
        leaves += per_leaf;
        let mut objective: f64 = 0.0;
        let mut choice = Vec::with_capacity(k_all);
        let mut ok = true;
        for k in 0..k_all {
            match best_inner(&inner[k], rates[k], counts[k]) {
                Some((e, mi, v)) => {
                    objective = objective.max(e);
                    choice.push((mi, v));
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && best.as_ref().is_none_or(|(b, _, _)| objective < *b) {
            best = Some((objective, idx.clone(), choice));
        }

        // Odometer step over channel assignments.
        let mut pos = n;
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < options[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }

    let Some((objective, assignment, choice)) = best else {
        return Ok(None);
    };

    let mut local: Vec<Vec<bool>> = Vec::with_capacity(k_all);
    let mut clock = Vec::with_capacity(k_all);
    let mut channels = vec![vec![false; n]; k_all];
    let mut e_c = vec![0.0; k_all];
    let mut e_t = vec![0.0; k_all];
    for (ch, &o) in assignment.iter().enumerate() {
        for &(k, _) in &options[ch][o].users {
            channels[k][ch] = true;
        }
    }
    // Realized rates under the winning assignment.
    let mut rates = vec![0.0f64; k_all];
    let mut counts = vec![0usize; k_all];
    for (ch, &o) in assignment.iter().enumerate() {
        for &(k, r) in &options[ch][o].users {
            rates[k] += r;
            counts[k] += 1;
        }
    }
    for (k, &(mi, v)) in choice.iter().enumerate() {
        let (flags, bits, cycles) = &inner[k].masks[mi];
        local.push(flags.clone());
        clock.push(v);
        e_c[k] = if *cycles > 0.0 { inner[k].coeff[v] * cycles } else { 0.0 };
        e_t[k] = if *bits > 0.0 {
            bits / rates[k] * inner[k].pw * counts[k] as f64
        } else {
            0.0
        };
    }

    Ok(Some(OracleOutcome {
        allocation: Allocation {
            local,
            clock,
            channels,
            energy_compute: e_c,
            energy_tx: e_t,
            objective,
        },
        objective,
        leaves,
    }))
}

/// Globally optimal solution by exhaustive enumeration. Always succeeds on a
/// valid scenario (the all-local point is feasible), so `None` never occurs.
pub fn brute_force(s: &Scenario, cap: u64) -> Result<Option<OracleOutcome>, OracleError> {
    search(s, cap, false)
}

/// Exhaustive optimum with every task pinned to offloading. May be `None`
/// when no channel assignment can carry all users within their deadlines.
pub fn brute_force_full_offload(
    s: &Scenario,
    cap: u64,
) -> Result<Option<OracleOutcome>, OracleError> {
    search(s, cap, true)
}

#[derive(Debug, Clone)]
pub struct BlpOracleOutcome {
    pub assignment: Option<Vec<bool>>,
    pub objective: f64,
}

/// Exhaustive 0/1 reference for the ILP engine: scan all 2^n assignments in
/// lexicographic order (variable 0 is the least significant bit).
pub fn brute_force_blp(p: &BinaryLinearProgram, cap: u64) -> Result<BlpOracleOutcome, OracleError> {
    let n = p.num_vars();
    if n >= 63 || (1u64 << n) > cap {
        return Err(OracleError::TooLarge { leaves: 2f64.powi(n as i32), cap });
    }
    let mut best: Option<(Vec<bool>, f64)> = None;
    for i in 0..(1u64 << n) {
        let a: Vec<bool> = (0..n).map(|j| i >> j & 1 == 1).collect();
        if !p.is_feasible(&a) {
            continue;
        }
        let obj = p.objective_value(&a);
        if p.sense == Sense::Feasibility {
            return Ok(BlpOracleOutcome { assignment: Some(a), objective: obj });
        }
        if best.as_ref().is_none_or(|(_, b)| obj < *b - 1e-12) {
            best = Some((a, obj));
        }
    }
    match best {
        Some((a, obj)) => Ok(BlpOracleOutcome { assignment: Some(a), objective: obj }),
        None => Ok(BlpOracleOutcome { assignment: None, objective: f64::NAN }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::evaluate;
    use crate::ilp::{self, IlpStatus, Relation};
    use crate::scenario::{generate, GeneratorParams};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tiny(seed: u64) -> Scenario {
        generate(
            &GeneratorParams {
                sc_count: 2,
                mues: 2,
                sues_per_sc: 1,
                num_channels: 3,
                tasks_per_user: 2,
                clock_levels: 3,
                ..GeneratorParams::default()
            },
            seed,
        )
        .unwrap()
    }

    #[test]
    fn oracle_agrees_with_main_evaluator() {
        for seed in [1, 2, 3] {
            let s = tiny(seed);
            let out = brute_force(&s, DEFAULT_LEAF_CAP).unwrap().unwrap();
            let ev = evaluate(&s, &out.allocation).unwrap();
            assert!(ev.feasible(), "seed {seed}: {:?}", ev.violations);
            assert_abs_diff_eq!(ev.objective, out.objective, epsilon = 1e-9 * (1.0 + out.objective));
        }
    }

    #[test]
    fn oracle_never_beats_no_offload() {
        let s = tiny(5);
        let out = brute_force(&s, DEFAULT_LEAF_CAP).unwrap().unwrap();
        // Best all-local objective is an upper bound on the optimum.
        let all_local = s
            .users
            .iter()
            .map(|u| {
                let xs = vec![true; u.tasks.len()];
                (0..u.clock_levels.len())
                    .filter(|&v| crate::energy::satisfies_c4(u, &xs, v))
                    .map(|v| u.weight * crate::energy::local_energy(u, &xs, v))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max);
        assert!(out.objective <= all_local * (1.0 + 1e-12));
    }

    #[test]
    fn full_offload_variant_pins_every_task() {
        let s = tiny(7);
        if let Some(out) = brute_force_full_offload(&s, DEFAULT_LEAF_CAP).unwrap() {
            assert!(out.allocation.local.iter().all(|x| x.iter().all(|&b| !b)));
            let full = out.objective;
            let free = brute_force(&s, DEFAULT_LEAF_CAP).unwrap().unwrap().objective;
            assert!(free <= full * (1.0 + 1e-12));
        }
    }

    #[test]
    fn channel_relabeling_leaves_objective_unchanged() {
        let s = tiny(11);
        let base = brute_force(&s, DEFAULT_LEAF_CAP).unwrap().unwrap().objective;
        let mut permuted = s.clone();
        for per_bs in permuted.radio.gains.iter_mut() {
            for per_ch in per_bs.iter_mut() {
                per_ch.rotate_left(1);
            }
        }
        let rotated = brute_force(&permuted, DEFAULT_LEAF_CAP).unwrap().unwrap().objective;
        assert_abs_diff_eq!(base, rotated, epsilon = 1e-9 * (1.0 + base));
    }

    #[test]
    fn leaf_cap_is_enforced() {
        let s = tiny(1);
        match brute_force(&s, 10) {
            Err(OracleError::TooLarge { cap: 10, .. }) => {}
            other => panic!("expected TooLarge, got {other:?}"),
        }
    }

    #[test]
    fn blp_oracle_matches_ilp_on_random_programs() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..40 {
            let n = rng.random_range(1..=8);
            let rows = rng.random_range(1..=6);
            let mut p = BinaryLinearProgram::new(Sense::Minimize);
            for j in 0..n {
                let v = p.add_var(format!("x{j}"));
                p.objective[v] = rng.random_range(-5..=5) as f64;
            }
            for _ in 0..rows {
                let mut coeffs: Vec<(usize, f64)> = Vec::new();
                for j in 0..n {
                    if rng.random_bool(0.6) {
                        coeffs.push((j, rng.random_range(-4..=4) as f64));
                    }
                }
                let rel = match rng.random_range(0..3) {
                    0 => Relation::Le,
                    1 => Relation::Ge,
                    _ => Relation::Eq,
                };
                let rhs = rng.random_range(-3..=3) as f64;
                p.add_row(coeffs, rel, rhs);
            }
            if p.validate().is_err() {
                continue; // a variable ended up in no row; irrelevant here
            }
            let reference = brute_force_blp(&p, 1 << 20).unwrap();
            let r = ilp::solve(&p, None).unwrap();
            match reference.assignment {
                Some(_) => {
                    assert_eq!(r.status, IlpStatus::Optimal);
                    assert_abs_diff_eq!(r.objective, reference.objective, epsilon = 1e-6);
                }
                None => assert_eq!(r.status, IlpStatus::Infeasible),
            }
        }
    }
}
