//! Reproducible random instance generation.
//!
//! Defaults reproduce the simulation setup used throughout the evaluation:
//! one 400 m macro cell with 12 MUEs, small cells of 30 m radius with 2 SUEs
//! each, 20 subchannels of 180 kHz, 3GPP pathloss with unit-mean exponential
//! fading, 11 clock levels on a 0-2 GHz grid and a cubic CPU power model.
//!
//! Generation is deterministic given the seed: all randomness flows through
//! a ChaCha8 stream with a fixed draw order, so the same (params, seed) pair
//! produces byte-identical scenarios across platforms.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Point, RadioConfig, Scenario, Task, Topology, User};

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("could not place {placed} small cells with separation {separation} m inside the macro disk")]
    Placement { placed: usize, separation: f64 },
}

/// Knobs for the random instance generator. `Default` gives the reference
/// simulation values.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    /// Number of small cells.
    pub sc_count: usize,
    /// Number of macro users.
    pub mues: usize,
    /// SUEs per small cell.
    pub sues_per_sc: usize,
    pub macro_radius_m: f64,
    pub sc_radius_m: f64,
    /// Subchannel count `N`.
    pub num_channels: usize,
    /// Subchannel bandwidth in Hz.
    pub bandwidth_hz: f64,
    pub noise_dbm_hz: f64,
    pub pt_macro_dbm_hz: f64,
    pub pt_sc_dbm_hz: f64,
    pub tasks_per_user: usize,
    pub total_cycles_per_user: f64,
    /// Number of clock levels on the uniform grid `0..=clock_max_hz`.
    pub clock_levels: usize,
    pub clock_max_hz: f64,
    /// Bits-per-cycle ratio range tasks are drawn from.
    pub bpc_range: (f64, f64),
    /// Multiplier applied to sampled BPC values (1.5 gives the "scenario 2"
    /// variant with 50% heavier payloads).
    pub bpc_multiplier: f64,
    pub weight_range: (f64, f64),
    /// Application period `T` in seconds.
    pub period_s: f64,
    /// Transmit deadline as a fraction of `T`.
    pub tau2_frac_range: (f64, f64),
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    /// When set, split each user's cycle budget randomly across tasks
    /// instead of equally.
    pub random_task_split: bool,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            sc_count: 3,
            mues: 12,
            sues_per_sc: 2,
            macro_radius_m: 400.0,
            sc_radius_m: 30.0,
            num_channels: 20,
            bandwidth_hz: 180e3,
            noise_dbm_hz: -140.0,
            pt_macro_dbm_hz: -33.0,
            pt_sc_dbm_hz: -43.0,
            tasks_per_user: 3,
            total_cycles_per_user: 0.2e9,
            clock_levels: 11,
            clock_max_hz: 2e9,
            bpc_range: (1e-5, 1e-3),
            bpc_multiplier: 1.0,
            weight_range: (0.8, 1.0),
            period_s: 0.1,
            tau2_frac_range: (0.7, 0.9),
            beta1: 0.34e-27,
            beta2: 3.0,
            beta3: 0.35,
            random_task_split: false,
        }
    }
}

/// 3GPP macro pathloss in dB for a distance in km: -128.1 - 37.6 log10(d).
pub fn pathloss_macro(d_km: f64) -> f64 {
    assert!(d_km > 0.0, "pathloss requires a positive distance");
    -128.1 - 37.6 * d_km.log10()
}

/// 3GPP small-cell pathloss in dB for a distance in km: -127 - 30 log10(d).
pub fn pathloss_sc(d_km: f64) -> f64 {
    assert!(d_km > 0.0, "pathloss requires a positive distance");
    -127.0 - 30.0 * d_km.log10()
}

/// dBm/Hz to W/Hz.
pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

// Links shorter than a meter are clamped so the log-distance model stays
// finite.
const MIN_DISTANCE_KM: f64 = 1e-3;

fn uniform_in_disk(rng: &mut ChaCha8Rng, center: Point, radius: f64) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    Point::new(center.x + r * theta.cos(), center.y + r * theta.sin())
}

/// Unit-mean exponential fading draw.
fn exp_fading(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random();
    (-(1.0 - u).ln()).max(1e-300)
}

fn check_params(p: &GeneratorParams) -> Result<(), GenerateError> {
    let bad = |msg: &str| Err(GenerateError::InvalidParams(msg.into()));
    if p.macro_radius_m <= 0.0 || p.sc_radius_m <= 0.0 {
        return bad("radii must be positive");
    }
    if p.sc_count > 0 && p.macro_radius_m < 2.0 * p.sc_radius_m {
        return bad("macro disk too small for a small cell");
    }
    if p.bandwidth_hz <= 0.0 {
        return bad("bandwidth must be positive");
    }
    if p.tasks_per_user == 0 || p.total_cycles_per_user <= 0.0 {
        return bad("need at least one task with a positive cycle budget");
    }
    if p.clock_levels == 0 || p.clock_max_hz <= 0.0 {
        return bad("need at least one clock level with a positive maximum");
    }
    if p.bpc_range.0 < 0.0 || p.bpc_range.1 < p.bpc_range.0 {
        return bad("invalid BPC range");
    }
    if p.weight_range.0 <= 0.0 || p.weight_range.1 < p.weight_range.0 {
        return bad("invalid weight range");
    }
    if p.period_s <= 0.0 {
        return bad("period must be positive");
    }
    if p.tau2_frac_range.0 <= 0.0
        || p.tau2_frac_range.1 < p.tau2_frac_range.0
        || p.tau2_frac_range.1 >= 1.0
    {
        return bad("tau2 fraction range must lie in (0, 1)");
    }
    if p.bpc_multiplier <= 0.0 {
        return bad("BPC multiplier must be positive");
    }
    Ok(())
}

fn place_sc_centers(
    p: &GeneratorParams,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Point>, GenerateError> {
    // SC BSs land uniformly in the macro disk (kept fully inside it) with a
    // minimum mutual separation of one SC diameter.
    let separation = 2.0 * p.sc_radius_m;
    let placement_radius = p.macro_radius_m - p.sc_radius_m;
    let mut centers: Vec<Point> = Vec::with_capacity(p.sc_count);
    let origin = Point::new(0.0, 0.0);
    for _ in 0..p.sc_count {
        let mut placed = false;
        for _attempt in 0..10_000 {
            let c = uniform_in_disk(rng, origin, placement_radius);
            if centers.iter().all(|o| o.distance(&c) >= separation) {
                centers.push(c);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(GenerateError::Placement {
                placed: centers.len(),
                separation,
            });
        }
    }
    Ok(centers)
}

fn uniform_range(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Generate a scenario. Deterministic given `(p, seed)`.
pub fn generate(p: &GeneratorParams, seed: u64) -> Result<Scenario, GenerateError> {
    check_params(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let sc_centers = place_sc_centers(p, &mut rng)?;
    let topology = Topology {
        macro_radius: p.macro_radius_m,
        sc_radius: p.sc_radius_m,
        sc_centers,
    };

    let clock_levels: Vec<f64> = if p.clock_levels == 1 {
        vec![p.clock_max_hz]
    } else {
        (0..p.clock_levels)
            .map(|i| p.clock_max_hz * i as f64 / (p.clock_levels - 1) as f64)
            .collect()
    };

    // Users: all MUEs first, then SUEs cell by cell. Per-user draw order is
    // position, task split, BPC per task, weight, tau2 fraction.
    let mut users = Vec::new();
    let origin = Point::new(0.0, 0.0);
    for cell in 0..=p.sc_count {
        let count = if cell == 0 { p.mues } else { p.sues_per_sc };
        let (center, radius) = if cell == 0 {
            (origin, p.macro_radius_m)
        } else {
            (topology.sc_centers[cell - 1], p.sc_radius_m)
        };
        for _ in 0..count {
            let position = uniform_in_disk(&mut rng, center, radius);
            let mut shares = vec![1.0; p.tasks_per_user];
            if p.random_task_split {
                for s in shares.iter_mut() {
                    *s = -(1.0 - rng.random::<f64>()).ln();
                }
            }
            let total_share: f64 = shares.iter().sum();
            let tasks: Vec<Task> = shares
                .iter()
                .map(|&s| {
                    let cycles = p.total_cycles_per_user * s / total_share;
                    let bpc = uniform_range(&mut rng, p.bpc_range) * p.bpc_multiplier;
                    Task {
                        cycles,
                        bits: cycles * bpc,
                    }
                })
                .collect();
            let weight = uniform_range(&mut rng, p.weight_range);
            let tau2 = uniform_range(&mut rng, p.tau2_frac_range) * p.period_s;
            users.push(User {
                cell,
                position,
                tasks,
                clock_levels: clock_levels.clone(),
                beta1: p.beta1,
                beta2: p.beta2,
                beta3: p.beta3,
                weight,
                tau1: p.period_s,
                tau2,
            });
        }
    }

    // Gains: per user, per BS, per channel; exponential fading on top of
    // log-distance pathloss, all in linear scale.
    let mut gains = Vec::with_capacity(users.len());
    for u in &users {
        let mut per_bs = Vec::with_capacity(topology.num_cells());
        for m in 0..topology.num_cells() {
            let d_km = (u.position.distance(&topology.bs_position(m)) / 1000.0)
                .max(MIN_DISTANCE_KM);
            let pl_db = if m == 0 {
                pathloss_macro(d_km)
            } else {
                pathloss_sc(d_km)
            };
            let pl = db_to_linear(pl_db);
            let per_ch: Vec<f64> = (0..p.num_channels)
                .map(|_| exp_fading(&mut rng) * pl)
                .collect();
            per_bs.push(per_ch);
        }
        gains.push(per_bs);
    }

    Ok(Scenario {
        topology,
        users,
        radio: RadioConfig {
            num_channels: p.num_channels,
            bandwidth: p.bandwidth_hz,
            noise_density: dbm_to_watt(p.noise_dbm_hz),
            pt_macro: dbm_to_watt(p.pt_macro_dbm_hz),
            pt_sc: dbm_to_watt(p.pt_sc_dbm_hz),
            gains,
        },
        period: p.period_s,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_scenario;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pathloss_reference_points() {
        assert_abs_diff_eq!(pathloss_macro(0.1), -90.5, epsilon = 1e-9);
        assert_abs_diff_eq!(pathloss_macro(1.0), -128.1, epsilon = 1e-9);
        // Hand evaluation: -128.1 - 37.6*log10(0.4).
        assert_abs_diff_eq!(pathloss_macro(0.4), -113.14, epsilon = 0.01);
        assert_abs_diff_eq!(pathloss_sc(0.01), -67.0, epsilon = 1e-9);
        assert_abs_diff_eq!(pathloss_sc(0.1), -97.0, epsilon = 1e-9);
        assert_abs_diff_eq!(pathloss_sc(0.03), -81.314, epsilon = 0.01);
    }

    #[test]
    #[should_panic(expected = "positive distance")]
    fn pathloss_rejects_nonpositive_distance() {
        pathloss_macro(0.0);
    }

    #[test]
    fn default_params_give_valid_scenario() {
        let p = GeneratorParams::default();
        let s = generate(&p, 1).unwrap();
        assert_eq!(s.users.len(), p.mues + p.sc_count * p.sues_per_sc);
        assert_eq!(s.users[0].clock_levels.len(), 11);
        assert_abs_diff_eq!(s.users[0].clock_levels[10], 2e9);
        assert_abs_diff_eq!(s.radio.noise_density, 1e-17, epsilon = 1e-25);
        assert!(validate_scenario(&s).is_empty());
        assert!(s
            .radio
            .gains
            .iter()
            .flatten()
            .flatten()
            .all(|&h| h > 0.0));
    }

    #[test]
    fn generation_is_deterministic() {
        let p = GeneratorParams::default();
        let a = generate(&p, 99).unwrap();
        let b = generate(&p, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = generate(&p, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn minimal_instance_generates() {
        let p = GeneratorParams {
            sc_count: 0,
            mues: 1,
            sues_per_sc: 0,
            num_channels: 1,
            tasks_per_user: 1,
            ..GeneratorParams::default()
        };
        let s = generate(&p, 0).unwrap();
        assert_eq!(s.users.len(), 1);
        assert!(validate_scenario(&s).is_empty());
    }

    #[test]
    fn bpc_multiplier_scales_bits_only() {
        let base = GeneratorParams::default();
        let heavy = GeneratorParams {
            bpc_multiplier: 1.5,
            ..base.clone()
        };
        let a = generate(&base, 5).unwrap();
        let b = generate(&heavy, 5).unwrap();
        for (ua, ub) in a.users.iter().zip(&b.users) {
            for (ta, tb) in ua.tasks.iter().zip(&ub.tasks) {
                assert_abs_diff_eq!(ta.cycles, tb.cycles);
                assert_abs_diff_eq!(tb.bits, 1.5 * ta.bits, epsilon = 1e-9 * ta.bits.abs());
            }
        }
        assert_eq!(a.radio.gains, b.radio.gains);
    }
}
