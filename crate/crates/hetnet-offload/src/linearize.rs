//! Construction of the linearized 0/1 programs used by the solvers.
//!
//! Three programs are built here:
//!
//! * the per-user placement subprogram (minimize offloaded bits subject to
//!   the compute-energy cap, the local deadline and one-clock selection);
//! * the full feasibility program at a fixed energy level `zeta`, covering
//!   task placement, clock selection and channel assignment jointly;
//! * the macro-tier variant that minimizes the number of channels the macro
//!   users need at level `zeta`, used by the low-complexity algorithm.
//!
//! All nonlinear terms are products of binaries and are replaced by
//! auxiliary binaries with the standard AND rows (`y >= sum - (n-1)`,
//! `y <= factor`). The energy-cap constraint is multiplied through by the
//! achievable rate so it stays linear; a redundant compute-only cap row is
//! kept per user so the zero-rate corner cannot escape the cap.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::energy::clock_coeffs;
use crate::ilp::{BinaryLinearProgram, Relation, Sense};
use crate::model::{Allocation, Scenario, User};
use crate::radio::{Combo, RateTable};

#[derive(Debug, Error)]
pub enum LinearizeError {
    #[error("zeta must be finite and nonnegative, got {0}")]
    BadZeta(f64),
    #[error("got {got} user fixings for {expected} users")]
    FixingCount { got: usize, expected: usize },
    #[error("user {user}: fixing does not match the user's tasks or clocks")]
    FixingShape { user: usize },
    #[error("channel index {0} out of range")]
    BadChannel(usize),
    #[error("channel index {0} listed twice")]
    DuplicateChannel(usize),
    #[error("user {user} has no rate entries in the table")]
    MissingRate { user: usize },
}

/// Add a binary `name` constrained to equal the product of the (binary)
/// `factors`, and return its index.
pub fn linearize_product(
    p: &mut BinaryLinearProgram,
    factors: &[usize],
    name: impl Into<String>,
) -> usize {
    assert!(factors.len() >= 2, "a product needs at least two factors");
    let y = p.add_var(name);
    p.mark_derived(y);
    // y >= sum(factors) - (n - 1)  <=>  sum(factors) - y <= n - 1
    let mut lower: Vec<(usize, f64)> = factors.iter().map(|&f| (f, 1.0)).collect();
    lower.push((y, -1.0));
    p.add_row(lower, Relation::Le, (factors.len() - 1) as f64);
    for &f in factors {
        p.add_row(vec![(y, 1.0), (f, -1.0)], Relation::Le, 0.0);
    }
    y
}

/// Per-user placement subprogram: minimize offloaded bits subject to the
/// weighted compute-energy cap, the local deadline, and one-clock selection.
pub struct Ps1Program {
    pub blp: BinaryLinearProgram,
    x_vars: Vec<usize>,
    mu_vars: Vec<usize>,
}

impl Ps1Program {
    /// Recover (task-local flags, clock index) from a solved assignment.
    pub fn decode(&self, assignment: &[bool]) -> (Vec<bool>, usize) {
        let local = self.x_vars.iter().map(|&j| assignment[j]).collect();
        let clock = self
            .mu_vars
            .iter()
            .position(|&j| assignment[j])
            .expect("exactly one clock is selected");
        (local, clock)
    }
}

/// Build the per-user placement subprogram at energy level `zeta`.
pub fn build_ps1(u: &User, zeta: f64) -> Ps1Program {
    assert!(zeta.is_finite() && zeta >= 0.0, "zeta must be finite and nonnegative");
    let coeffs = clock_coeffs(u);
    let mut p = BinaryLinearProgram::new(Sense::Minimize);

    let x_vars: Vec<usize> = (0..u.tasks.len())
        .map(|l| p.add_var(format!("x_t{l}")))
        .collect();
    for (l, t) in u.tasks.iter().enumerate() {
        p.objective[x_vars[l]] = -t.bits;
    }
    p.objective_offset = u.total_bits();

    let mu_vars: Vec<usize> = (0..u.clock_levels.len())
        .map(|v| p.add_var(format!("mu_v{v}")))
        .collect();
    p.add_row(mu_vars.iter().map(|&m| (m, 1.0)).collect(), Relation::Eq, 1.0);

    let mut cap: Vec<(usize, f64)> = Vec::new();
    let mut deadline: Vec<(usize, f64)> = Vec::new();
    for (v, &f) in u.clock_levels.iter().enumerate() {
        if f > 0.0 {
            for (l, t) in u.tasks.iter().enumerate() {
                let z = linearize_product(&mut p, &[x_vars[l], mu_vars[v]], format!("z_t{l}_v{v}"));
                cap.push((z, u.weight * coeffs[v] * t.cycles));
                deadline.push((z, t.cycles / f));
            }
        } else {
            // The idle level cannot host local work.
            for &x in &x_vars {
                p.add_row(vec![(x, 1.0), (mu_vars[v], 1.0)], Relation::Le, 1.0);
            }
        }
    }
    p.add_row(cap, Relation::Le, zeta);
    p.add_row(deadline, Relation::Le, u.tau1);

    Ps1Program { blp: p, x_vars, mu_vars }
}

/// How a user enters the joint feasibility program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UserFixing {
    /// All placement and clock variables free.
    Free,
    /// User computes everything locally at the given clock; it is excluded
    /// from the program entirely (its energy cap is checked elsewhere).
    Local { clock: usize },
    /// Tasks flagged `true` are pinned to offloading; the rest stay free.
    Offloading { forced_offload: Vec<bool> },
}

impl UserFixing {
    fn included(&self) -> bool {
        !matches!(self, UserFixing::Local { .. })
    }

    fn forced(&self, l: usize) -> bool {
        match self {
            UserFixing::Offloading { forced_offload } => forced_offload[l],
            _ => false,
        }
    }
}

/// A built joint program together with the variable maps needed to read a
/// solution back into an [`Allocation`].
pub struct P2Program {
    pub blp: BinaryLinearProgram,
    included: Vec<usize>,
    channels: Vec<usize>,
    combos: Vec<Combo>,
    x: BTreeMap<(usize, usize), usize>,
    mu: BTreeMap<(usize, usize), usize>,
    rho: BTreeMap<(usize, usize), usize>,
    alpha: BTreeMap<(usize, usize), usize>,
}

impl P2Program {
    /// Users the program carries variables for.
    pub fn included_users(&self) -> &[usize] {
        &self.included
    }

    /// Turn a solved 0/1 assignment into an allocation. Users excluded via
    /// `UserFixing::Local` come out all-local at their fixed clock; users
    /// not covered by the program at all come out all-local at clock 0 and
    /// must be overwritten by the caller.
    pub fn decode(&self, s: &Scenario, fixings: &[UserFixing], assignment: &[bool]) -> Allocation {
        let k_all = s.num_users();
        let mut local: Vec<Vec<bool>> = s.users.iter().map(|u| vec![true; u.tasks.len()]).collect();
        let mut clock = vec![0usize; k_all];
        let mut channels = vec![vec![false; s.radio.num_channels]; k_all];

        for (k, fix) in fixings.iter().enumerate() {
            if let UserFixing::Local { clock: c } = fix {
                clock[k] = *c;
            }
        }
        for &k in &self.included {
            let u = &s.users[k];
            for l in 0..u.tasks.len() {
                if fixings[k].forced(l) {
                    local[k][l] = false;
                }
            }
            for l in 0..u.tasks.len() {
                if let Some(&j) = self.x.get(&(k, l)) {
                    local[k][l] = assignment[j];
                }
            }
            clock[k] = (0..u.clock_levels.len())
                .find(|&v| assignment[self.mu[&(k, v)]])
                .expect("exactly one clock is selected");
            if u.is_mue() {
                for (ni, &n) in self.channels.iter().enumerate() {
                    channels[k][n] = assignment[self.rho[&(k, ni)]];
                }
            } else {
                for (&(ni, ci), &j) in &self.alpha {
                    if assignment[j] && self.combos[ci].slot_of(k).is_some() {
                        channels[k][self.channels[ni]] = true;
                    }
                }
            }
        }

        Allocation {
            local,
            clock,
            channels,
            energy_compute: vec![0.0; k_all],
            energy_tx: vec![0.0; k_all],
            objective: 0.0,
        }
    }
}

/// Build the joint feasibility program at energy level `zeta` over the given
/// channel subset. Every non-`Local` user participates.
pub fn build_p2_feasibility(
    s: &Scenario,
    rt: &RateTable,
    zeta: f64,
    fixings: &[UserFixing],
    channels: &[usize],
) -> Result<P2Program, LinearizeError> {
    build_inner(s, rt, zeta, fixings, channels, false, Sense::Feasibility)
}

/// Build the macro-tier program: same constraints restricted to macro users,
/// minimizing the total number of channels they occupy.
pub fn build_mue_channel_min(
    s: &Scenario,
    rt: &RateTable,
    zeta: f64,
    fixings: &[UserFixing],
    channels: &[usize],
) -> Result<P2Program, LinearizeError> {
    build_inner(s, rt, zeta, fixings, channels, true, Sense::Minimize)
}

fn build_inner(
    s: &Scenario,
    rt: &RateTable,
    zeta: f64,
    fixings: &[UserFixing],
    channels: &[usize],
    mue_only: bool,
    sense: Sense,
) -> Result<P2Program, LinearizeError> {
    if !(zeta.is_finite() && zeta >= 0.0) {
        return Err(LinearizeError::BadZeta(zeta));
    }
    if fixings.len() != s.num_users() {
        return Err(LinearizeError::FixingCount { got: fixings.len(), expected: s.num_users() });
    }
    {
        let mut seen = vec![false; s.radio.num_channels];
        for &n in channels {
            if n >= s.radio.num_channels {
                return Err(LinearizeError::BadChannel(n));
            }
            if seen[n] {
                return Err(LinearizeError::DuplicateChannel(n));
            }
            seen[n] = true;
        }
    }
    for (k, fix) in fixings.iter().enumerate() {
        let bad = match fix {
            UserFixing::Local { clock } => *clock >= s.users[k].clock_levels.len(),
            UserFixing::Offloading { forced_offload } => {
                forced_offload.len() != s.users[k].tasks.len()
            }
            UserFixing::Free => false,
        };
        if bad {
            return Err(LinearizeError::FixingShape { user: k });
        }
    }

    let included: Vec<usize> = (0..s.num_users())
        .filter(|&k| fixings[k].included() && (!mue_only || s.users[k].is_mue()))
        .collect();

    // Co-channel combos restricted to participating SUEs.
    let mut combos: Vec<Combo> = Vec::new();
    if !mue_only {
        for combo in &rt.combos {
            if combo.occupants.iter().flatten().all(|k| included.contains(k)) {
                combos.push(combo.clone());
            }
        }
    }
    // Positions of the kept combos inside the rate table.
    let table_pos: Vec<usize> = combos
        .iter()
        .map(|c| rt.combos.iter().position(|t| t == c).expect("combo from table"))
        .collect();

    let mut p = BinaryLinearProgram::new(sense);
    let mut x: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut mu: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut rho: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut alpha: BTreeMap<(usize, usize), usize> = BTreeMap::new();

    for &k in &included {
        let u = &s.users[k];
        for l in 0..u.tasks.len() {
            if !fixings[k].forced(l) {
                x.insert((k, l), p.add_var(format!("x_k{k}_t{l}")));
            }
        }
        for v in 0..u.clock_levels.len() {
            mu.insert((k, v), p.add_var(format!("mu_k{k}_v{v}")));
        }
    }
    for &k in &included {
        if s.users[k].is_mue() {
            for (ni, &n) in channels.iter().enumerate() {
                let j = p.add_var(format!("rho_k{k}_n{n}"));
                if sense == Sense::Minimize {
                    p.objective[j] = 1.0;
                }
                rho.insert((k, ni), j);
            }
        }
    }
    for (ni, &n) in channels.iter().enumerate() {
        for ci in 0..combos.len() {
            alpha.insert((ni, ci), p.add_var(format!("alpha_n{n}_c{ci}")));
        }
    }

    // Channel exclusivity: at most one macro user or one combo per channel.
    for ni in 0..channels.len() {
        let mut row: Vec<(usize, f64)> = Vec::new();
        for &k in &included {
            if let Some(&j) = rho.get(&(k, ni)) {
                row.push((j, 1.0));
            }
        }
        for ci in 0..combos.len() {
            row.push((alpha[&(ni, ci)], 1.0));
        }
        if !row.is_empty() {
            p.add_row(row, Relation::Le, 1.0);
        }
    }

    for &k in &included {
        let u = &s.users[k];
        let coeffs = clock_coeffs(u);
        let w = u.weight;
        let pw = s.radio.total_power(u.cell) * s.radio.bandwidth;

        // (channel-indicator variable, achievable rate on it) pairs for k.
        let radio: Vec<(usize, f64)> = if u.is_mue() {
            let i = rt.mue_pos(k).ok_or(LinearizeError::MissingRate { user: k })?;
            channels
                .iter()
                .enumerate()
                .map(|(ni, &n)| (rho[&(k, ni)], rt.mue_rate[i][n]))
                .collect()
        } else {
            let slot = u.cell - 1;
            let mut pairs = Vec::new();
            for (ni, &n) in channels.iter().enumerate() {
                for (ci, combo) in combos.iter().enumerate() {
                    if combo.slot_of(k).is_some() {
                        pairs.push((alpha[&(ni, ci)], rt.sue_rate[n][table_pos[ci]][slot]));
                    }
                }
            }
            pairs
        };

        let free: Vec<usize> = (0..u.tasks.len()).filter(|&l| !fixings[k].forced(l)).collect();
        let b_total = u.total_bits();

        // One clock level is selected.
        let mu_row: Vec<(usize, f64)> = (0..u.clock_levels.len())
            .map(|v| (mu[&(k, v)], 1.0))
            .collect();
        p.add_row(mu_row, Relation::Eq, 1.0);

        // Transmit deadline: offloaded bits fit within tau2 at the achieved
        // rate. With no channels this forces zero offloaded bits.
        let mut c1: Vec<(usize, f64)> = free
            .iter()
            .map(|&l| (x[&(k, l)], -u.tasks[l].bits))
            .collect();
        for &(j, r) in &radio {
            c1.push((j, -u.tau2 * r));
        }
        p.add_row(c1, Relation::Le, -b_total);

        // Products, compute-energy cap, local deadline, and the
        // rate-multiplied energy cap.
        let mut cap: Vec<(usize, f64)> = Vec::new();
        let mut deadline: Vec<(usize, f64)> = Vec::new();
        let mut level: Vec<(usize, f64)> = Vec::new();
        for &(j, r) in &radio {
            level.push((j, w * pw * b_total - zeta * r));
        }
        for (v, &f) in u.clock_levels.iter().enumerate() {
            if f > 0.0 {
                for &l in &free {
                    let c = u.tasks[l].cycles;
                    let z = linearize_product(
                        &mut p,
                        &[x[&(k, l)], mu[&(k, v)]],
                        format!("z_k{k}_t{l}_v{v}"),
                    );
                    cap.push((z, w * coeffs[v] * c));
                    deadline.push((z, c / f));
                    for (ri, &(j, r)) in radio.iter().enumerate() {
                        let q = linearize_product(
                            &mut p,
                            &[z, j],
                            format!("q_k{k}_t{l}_v{v}_r{ri}"),
                        );
                        level.push((q, w * coeffs[v] * c * r));
                    }
                }
            } else {
                for &l in &free {
                    p.add_row(vec![(x[&(k, l)], 1.0), (mu[&(k, v)], 1.0)], Relation::Le, 1.0);
                }
            }
        }
        for &l in &free {
            let b = u.tasks[l].bits;
            for (ri, &(j, _)) in radio.iter().enumerate() {
                let uv = linearize_product(&mut p, &[x[&(k, l)], j], format!("u_k{k}_t{l}_r{ri}"));
                level.push((uv, -w * pw * b));
            }
        }
        p.add_row(cap, Relation::Le, zeta);
        p.add_row(deadline, Relation::Le, u.tau1);
        p.add_row(level, Relation::Le, 0.0);
    }

    Ok(P2Program {
        blp: p,
        included,
        channels: channels.to_vec(),
        combos,
        x,
        mu,
        rho,
        alpha,
    })
}
