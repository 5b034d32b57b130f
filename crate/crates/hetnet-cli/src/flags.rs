//! Flag groups shared by several subcommands: generator knobs, solver
//! options and the algorithm selector.

use std::time::Duration;

use hetnet_offload::radio::DEFAULT_COMBO_CAP;
use hetnet_offload::scenario::GeneratorParams;
use hetnet_offload::solver::{Algorithm, SolveOptions};
use serde::Serialize;

use crate::util::CliError;

/// Environment variable holding the default overall time budget in seconds.
pub const TIME_BUDGET_ENV: &str = "HETNET_TIME_BUDGET";

fn d() -> GeneratorParams {
    GeneratorParams::default()
}

/// Scenario-generator knobs. Defaults reproduce the reference simulation
/// setup.
#[derive(Debug, Clone, clap::Args)]
pub struct GenFlags {
    /// Number of small cells.
    #[arg(long, default_value_t = d().sc_count)]
    pub sc_count: usize,
    /// Number of macro users.
    #[arg(long, default_value_t = d().mues)]
    pub mues: usize,
    /// Small-cell users per small cell.
    #[arg(long, default_value_t = d().sues_per_sc)]
    pub sues_per_sc: usize,
    /// Macro coverage radius in meters.
    #[arg(long, default_value_t = d().macro_radius_m)]
    pub macro_radius: f64,
    /// Small-cell coverage radius in meters.
    #[arg(long, default_value_t = d().sc_radius_m)]
    pub sc_radius: f64,
    /// Number of OFDMA subchannels.
    #[arg(long, default_value_t = d().num_channels)]
    pub channels: usize,
    /// Subchannel bandwidth in Hz.
    #[arg(long, default_value_t = d().bandwidth_hz)]
    pub bandwidth: f64,
    /// Noise power density in dBm/Hz.
    #[arg(long, default_value_t = d().noise_dbm_hz)]
    pub noise_dbm_hz: f64,
    /// Macro-user transmit power density in dBm/Hz.
    #[arg(long, default_value_t = d().pt_macro_dbm_hz)]
    pub pt_macro_dbm_hz: f64,
    /// Small-cell-user transmit power density in dBm/Hz.
    #[arg(long, default_value_t = d().pt_sc_dbm_hz)]
    pub pt_sc_dbm_hz: f64,
    /// Independent tasks per user.
    #[arg(long, default_value_t = d().tasks_per_user)]
    pub tasks_per_user: usize,
    /// Total CPU cycles per user over all tasks.
    #[arg(long, default_value_t = d().total_cycles_per_user)]
    pub total_cycles: f64,
    /// Number of clock levels on the uniform DVFS grid (including 0).
    #[arg(long, default_value_t = d().clock_levels)]
    pub clock_levels: usize,
    /// Maximum CPU clock in Hz.
    #[arg(long, default_value_t = d().clock_max_hz)]
    pub clock_max_hz: f64,
    /// Lower bound of the bits-per-cycle draw.
    #[arg(long, default_value_t = d().bpc_range.0)]
    pub bpc_min: f64,
    /// Upper bound of the bits-per-cycle draw.
    #[arg(long, default_value_t = d().bpc_range.1)]
    pub bpc_max: f64,
    /// Multiplier on sampled bits-per-cycle values (1.5 models 50% heavier
    /// payloads).
    #[arg(long, default_value_t = d().bpc_multiplier)]
    pub bpc_multiplier: f64,
    /// Lower bound of the per-user energy weight draw.
    #[arg(long, default_value_t = d().weight_range.0)]
    pub weight_min: f64,
    /// Upper bound of the per-user energy weight draw.
    #[arg(long, default_value_t = d().weight_range.1)]
    pub weight_max: f64,
    /// Application period T in seconds (also the local deadline).
    #[arg(long, default_value_t = d().period_s)]
    pub period: f64,
    /// Lower bound of the transmit deadline as a fraction of T.
    #[arg(long, default_value_t = d().tau2_frac_range.0)]
    pub tau2_min_frac: f64,
    /// Upper bound of the transmit deadline as a fraction of T.
    #[arg(long, default_value_t = d().tau2_frac_range.1)]
    pub tau2_max_frac: f64,
    /// CPU power coefficient beta1 (power = beta1 f^beta2 + beta3).
    #[arg(long, default_value_t = d().beta1)]
    pub beta1: f64,
    /// CPU power exponent beta2.
    #[arg(long, default_value_t = d().beta2)]
    pub beta2: f64,
    /// CPU idle power beta3 in watts.
    #[arg(long, default_value_t = d().beta3)]
    pub beta3: f64,
    /// Split each user's cycle budget randomly across tasks instead of
    /// equally.
    #[arg(long)]
    pub random_task_split: bool,
}

impl GenFlags {
    pub fn to_params(&self) -> GeneratorParams {
        GeneratorParams {
            sc_count: self.sc_count,
            mues: self.mues,
            sues_per_sc: self.sues_per_sc,
            macro_radius_m: self.macro_radius,
            sc_radius_m: self.sc_radius,
            num_channels: self.channels,
            bandwidth_hz: self.bandwidth,
            noise_dbm_hz: self.noise_dbm_hz,
            pt_macro_dbm_hz: self.pt_macro_dbm_hz,
            pt_sc_dbm_hz: self.pt_sc_dbm_hz,
            tasks_per_user: self.tasks_per_user,
            total_cycles_per_user: self.total_cycles,
            clock_levels: self.clock_levels,
            clock_max_hz: self.clock_max_hz,
            bpc_range: (self.bpc_min, self.bpc_max),
            bpc_multiplier: self.bpc_multiplier,
            weight_range: (self.weight_min, self.weight_max),
            period_s: self.period,
            tau2_frac_range: (self.tau2_min_frac, self.tau2_max_frac),
            beta1: self.beta1,
            beta2: self.beta2,
            beta3: self.beta3,
            random_task_split: self.random_task_split,
        }
    }
}

/// Solver options shared by `solve`, `sweep` and `compare`.
#[derive(Debug, Clone, clap::Args)]
pub struct SolveFlags {
    /// Bisection tolerance on the energy level, in joules.
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    /// Overall wall-clock budget in seconds (default: the HETNET_TIME_BUDGET
    /// environment variable, if set).
    #[arg(long)]
    pub time_budget: Option<f64>,
    /// Wall-clock budget per branch-and-bound solve, in seconds.
    #[arg(long)]
    pub ilp_time_budget: Option<f64>,
    /// Cap on precomputed rate-table entries.
    #[arg(long, default_value_t = DEFAULT_COMBO_CAP)]
    pub combo_cap: usize,
}

fn seconds(label: &str, v: f64) -> Result<Duration, CliError> {
    if !v.is_finite() || v < 0.0 {
        return Err(CliError::Invalid(format!(
            "{label} must be a nonnegative number of seconds, got {v}"
        )));
    }
    Ok(Duration::from_secs_f64(v))
}

/// Default overall budget from the environment, if the variable is set.
pub fn env_time_budget() -> Result<Option<Duration>, CliError> {
    match std::env::var(TIME_BUDGET_ENV) {
        Ok(raw) => {
            let v: f64 = raw.trim().parse().map_err(|_| {
                CliError::Invalid(format!("{TIME_BUDGET_ENV}={raw:?} is not a number of seconds"))
            })?;
            Ok(Some(seconds(TIME_BUDGET_ENV, v)?))
        }
        Err(_) => Ok(None),
    }
}

impl SolveFlags {
    pub fn to_options(&self) -> Result<SolveOptions, CliError> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(CliError::Invalid(format!(
                "--epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        let time_budget = match self.time_budget {
            Some(v) => Some(seconds("--time-budget", v)?),
            None => env_time_budget()?,
        };
        let ilp_time_budget = match self.ilp_time_budget {
            Some(v) => Some(seconds("--ilp-time-budget", v)?),
            None => None,
        };
        Ok(SolveOptions {
            epsilon: self.epsilon,
            time_budget,
            ilp_time_budget,
            combo_cap: self.combo_cap,
        })
    }
}

/// Algorithm selector as exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgArg {
    Optimal,
    #[value(alias = "lc")]
    LowComplexity,
    NoOffload,
    FullOffload,
}

impl AlgArg {
    pub fn label(self) -> &'static str {
        match self {
            AlgArg::Optimal => "optimal",
            AlgArg::LowComplexity => "low-complexity",
            AlgArg::NoOffload => "no-offload",
            AlgArg::FullOffload => "full-offload",
        }
    }
}

impl From<AlgArg> for Algorithm {
    fn from(a: AlgArg) -> Algorithm {
        match a {
            AlgArg::Optimal => Algorithm::Optimal,
            AlgArg::LowComplexity => Algorithm::LowComplexity,
            AlgArg::NoOffload => Algorithm::NoOffload,
            AlgArg::FullOffload => Algorithm::FullOffload,
        }
    }
}
