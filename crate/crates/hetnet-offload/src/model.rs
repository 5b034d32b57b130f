//! Domain types for a HetNet problem instance and its solutions.
//!
//! Everything here is plain data plus validation; no solving. All types are
//! immutable after construction and safe to share across solver workers.

use serde::{Deserialize, Serialize};

/// 2-D position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Cell geometry: one macro cell (index 0) overlaying `M` small cells
/// (indices `1..=M`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    /// Macro coverage radius in meters. The macro BS sits at the origin.
    pub macro_radius: f64,
    /// Small-cell coverage radius in meters.
    pub sc_radius: f64,
    /// Small-cell BS positions, in meters.
    pub sc_centers: Vec<Point>,
}

impl Topology {
    /// Number of small cells (`M`).
    pub fn num_small_cells(&self) -> usize {
        self.sc_centers.len()
    }

    /// Number of base stations including the macro (`M + 1`).
    pub fn num_cells(&self) -> usize {
        self.sc_centers.len() + 1
    }

    /// Position of BS `m` (0 = macro, at the origin).
    pub fn bs_position(&self, m: usize) -> Point {
        if m == 0 {
            Point::new(0.0, 0.0)
        } else {
            self.sc_centers[m - 1]
        }
    }
}

/// One independent computation task: CPU cycles to execute it, and bits to
/// ship its program state when offloaded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub cycles: f64,
    pub bits: f64,
}

/// A mobile user together with its task set, DVFS clock grid, CPU power
/// coefficients, energy weight and latency budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct User {
    /// Serving cell index: 0 for the macro BS, `1..=M` for small cells.
    pub cell: usize,
    pub position: Point,
    pub tasks: Vec<Task>,
    /// Selectable clock frequencies in cycles/s, ascending. A value of 0
    /// models the idle level.
    pub clock_levels: Vec<f64>,
    /// CPU power model coefficients: power = beta1 * f^beta2 + beta3.
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    /// Energy weight in the min-max objective.
    pub weight: f64,
    /// Local-computation deadline in seconds.
    pub tau1: f64,
    /// Transmission deadline in seconds.
    pub tau2: f64,
}

impl User {
    pub fn is_mue(&self) -> bool {
        self.cell == 0
    }

    /// Total offload payload in bits over all tasks.
    pub fn total_bits(&self) -> f64 {
        self.tasks.iter().map(|t| t.bits).sum()
    }
}

/// Sum of CPU cycles over all of a user's tasks.
pub fn total_cycles(user: &User) -> f64 {
    user.tasks.iter().map(|t| t.cycles).sum()
}

/// OFDMA radio parameters and per-link channel gains.
///
/// Gains are stored pre-combined (fading times pathloss) in linear scale;
/// dB only appears in the scenario generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    /// Number of subchannels `N`.
    pub num_channels: usize,
    /// Subchannel bandwidth `W` in Hz.
    pub bandwidth: f64,
    /// Noise power density at every BS on every channel, W/Hz.
    pub noise_density: f64,
    /// Transmit power density of MUEs, W/Hz.
    pub pt_macro: f64,
    /// Transmit power density of SUEs, W/Hz.
    pub pt_sc: f64,
    /// Linear power gains indexed `[user][bs][channel]`.
    pub gains: Vec<Vec<Vec<f64>>>,
}

impl RadioConfig {
    /// Transmit power density for a user served by cell `m`.
    pub fn tx_power(&self, cell: usize) -> f64 {
        if cell == 0 {
            self.pt_macro
        } else {
            self.pt_sc
        }
    }

    /// Total radiating power density (circuit + transmit). The circuit part
    /// is half the transmit part.
    pub fn total_power(&self, cell: usize) -> f64 {
        1.5 * self.tx_power(cell)
    }
}

/// A complete problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub topology: Topology,
    pub users: Vec<User>,
    pub radio: RadioConfig,
    /// Application period `T` in seconds.
    #[serde(rename = "T")]
    pub period: f64,
    /// Seed the instance was generated from (bookkeeping only).
    pub seed: u64,
}

impl Scenario {
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    /// Global indices of users served by cell `m`.
    pub fn cell_users(&self, m: usize) -> Vec<usize> {
        (0..self.users.len())
            .filter(|&k| self.users[k].cell == m)
            .collect()
    }

    /// Global indices of macro users.
    pub fn mues(&self) -> Vec<usize> {
        self.cell_users(0)
    }
}

/// A complete solution: task placement, clock selection, channel assignment
/// and the realized energies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    /// `local[k][l]` is true when user `k` executes task `l` locally.
    pub local: Vec<Vec<bool>>,
    /// Selected clock-level index per user.
    pub clock: Vec<usize>,
    /// `channels[k][n]` is true when subchannel `n` is assigned to user `k`.
    pub channels: Vec<Vec<bool>>,
    /// Per-user computation energy in joules.
    pub energy_compute: Vec<f64>,
    /// Per-user transmission energy in joules.
    pub energy_tx: Vec<f64>,
    /// max over users of `weight * (energy_compute + energy_tx)`.
    pub objective: f64,
}

impl Allocation {
    /// All-local allocation skeleton with the given per-user clock indices.
    /// Energies are left at zero; call `energy::evaluate` to fill them in.
    pub fn all_local(s: &Scenario, clock: Vec<usize>) -> Self {
        Allocation {
            local: s.users.iter().map(|u| vec![true; u.tasks.len()]).collect(),
            clock,
            channels: vec![vec![false; s.radio.num_channels]; s.users.len()],
            energy_compute: vec![0.0; s.users.len()],
            energy_tx: vec![0.0; s.users.len()],
            objective: 0.0,
        }
    }

    /// Number of channels assigned to user `k`.
    pub fn channels_used(&self, k: usize) -> usize {
        self.channels[k].iter().filter(|&&b| b).count()
    }
}

/// Collect every invariant violation in a scenario. Empty means valid.
pub fn validate_scenario(s: &Scenario) -> Vec<String> {
    let mut errs = Vec::new();
    let t = &s.topology;
    if t.macro_radius <= 0.0 {
        errs.push("topology: macro radius must be positive".into());
    }
    if t.sc_radius <= 0.0 {
        errs.push("topology: small-cell radius must be positive".into());
    }
    for (i, c) in t.sc_centers.iter().enumerate() {
        if c.distance(&Point::new(0.0, 0.0)) > t.macro_radius {
            errs.push(format!("topology: SC center {i} outside macro disk"));
        }
    }

    let r = &s.radio;
    if r.bandwidth <= 0.0 {
        errs.push("radio: bandwidth must be positive".into());
    }
    if r.noise_density <= 0.0 {
        errs.push("radio: noise density must be positive".into());
    }
    if r.pt_macro <= 0.0 || r.pt_sc <= 0.0 {
        errs.push("radio: transmit powers must be positive".into());
    }
    if r.gains.len() != s.users.len() {
        errs.push(format!(
            "radio: gains for {} users, scenario has {}",
            r.gains.len(),
            s.users.len()
        ));
    }
    for (k, per_bs) in r.gains.iter().enumerate() {
        if per_bs.len() != t.num_cells() {
            errs.push(format!("radio: user {k} has gains for {} BSs, expected {}", per_bs.len(), t.num_cells()));
            continue;
        }
        for (m, per_ch) in per_bs.iter().enumerate() {
            if per_ch.len() != r.num_channels {
                errs.push(format!("radio: user {k} BS {m} has {} channel gains, expected {}", per_ch.len(), r.num_channels));
            }
            if per_ch.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
                errs.push(format!("radio: user {k} BS {m} has a non-positive gain"));
            }
        }
    }

    if s.period <= 0.0 {
        errs.push("scenario: period T must be positive".into());
    }
    for (k, u) in s.users.iter().enumerate() {
        if u.cell >= t.num_cells() {
            errs.push(format!("user {k}: invalid cell index {}", u.cell));
        }
        for (l, task) in u.tasks.iter().enumerate() {
            if !(task.cycles > 0.0) {
                errs.push(format!("user {k}: task {l} cycles must be positive"));
            }
            if task.bits < 0.0 {
                errs.push(format!("user {k}: task {l} bits must be nonnegative"));
            }
        }
        if u.clock_levels.is_empty() {
            errs.push(format!("user {k}: empty clock level set"));
        }
        if u.clock_levels.windows(2).any(|w| w[0] > w[1]) {
            errs.push(format!("user {k}: clock levels not sorted ascending"));
        }
        if u.clock_levels.iter().any(|&f| f < 0.0) {
            errs.push(format!("user {k}: negative clock level"));
        }
        let load = total_cycles(u);
        let feasible_clock = u
            .clock_levels
            .iter()
            .any(|&f| f > 0.0 && load / f <= u.tau1);
        if load > 0.0 && !feasible_clock {
            errs.push(format!("user {k}: no feasible clock level"));
        }
        if !(u.weight > 0.0) {
            errs.push(format!("user {k}: weight must be positive"));
        }
        if !(u.tau2 > 0.0) {
            errs.push(format!("user {k}: tau2 must be positive"));
        }
        if u.tau2 >= s.period {
            errs.push(format!("user {k}: tau2 must be below the period T"));
        }
        if !(u.tau1 > 0.0) || u.tau1 > s.period {
            errs.push(format!("user {k}: tau1 must lie in (0, T]"));
        }
    }
    errs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate, GeneratorParams};

    #[test]
    fn total_cycles_sums_tasks() {
        let mk = |cycles: &[f64]| User {
            cell: 0,
            position: Point::new(0.0, 0.0),
            tasks: cycles.iter().map(|&c| Task { cycles: c, bits: 0.0 }).collect(),
            clock_levels: vec![2e9],
            beta1: 0.34e-27,
            beta2: 3.0,
            beta3: 0.35,
            weight: 1.0,
            tau1: 0.1,
            tau2: 0.08,
        };
        let u = mk(&[0.2e9 / 3.0, 0.2e9 / 3.0, 0.2e9 / 3.0]);
        assert!((total_cycles(&u) - 0.2e9).abs() < 1e-3);
        assert_eq!(total_cycles(&mk(&[])), 0.0);
        assert_eq!(total_cycles(&mk(&[1e6, 2e6])), 3e6);
    }

    #[test]
    fn generated_scenario_is_valid() {
        let s = generate(&GeneratorParams::default(), 7).unwrap();
        assert_eq!(validate_scenario(&s), Vec::<String>::new());
    }

    #[test]
    fn validation_flags_bad_users() {
        let mut s = generate(&GeneratorParams::default(), 7).unwrap();
        s.users[3].clock_levels = vec![0.0; 3];
        s.users[1].tau2 = 0.0;
        let errs = validate_scenario(&s);
        assert!(errs.iter().any(|e| e == "user 3: no feasible clock level"));
        assert!(errs.iter().any(|e| e == "user 1: tau2 must be positive"));
    }

    #[test]
    fn scenario_roundtrips_through_json() {
        let s = generate(&GeneratorParams::default(), 42).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: Scenario = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
        // Serialization itself is stable too.
        assert_eq!(text, serde_json::to_string(&back).unwrap());
    }
}
