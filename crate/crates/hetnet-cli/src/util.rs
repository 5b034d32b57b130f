//! Error-to-exit-code mapping and small I/O helpers shared by the
//! subcommands.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver timeout, 4 instance too
//! large. Anything unexpected maps to 1.

use std::fs;
use std::io::{self, Write};

use hetnet_offload::model::validate_scenario;
use hetnet_offload::radio::RadioError;
use hetnet_offload::solver::SolveError;
use hetnet_offload::Scenario;

pub const EXIT_OK: u8 = 0;
pub const EXIT_TIMEOUT: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    TooLarge(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::TooLarge(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.into())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Other(e.into())
    }
}

/// Map solver failures to exit-code categories: bad scenarios and infeasible
/// instances are the caller's input, blown caps are "too large", everything
/// else is an internal failure.
pub fn map_solve(e: SolveError) -> CliError {
    let msg = e.to_string();
    match e {
        SolveError::Invalid(_) | SolveError::Infeasible(_) => CliError::Invalid(msg),
        SolveError::Radio(RadioError::TooLarge { .. }) => CliError::TooLarge(msg),
        other => CliError::Other(anyhow::Error::new(other)),
    }
}

pub fn map_radio(e: RadioError) -> CliError {
    match e {
        RadioError::TooLarge { .. } => CliError::TooLarge(e.to_string()),
        other => CliError::Other(anyhow::Error::new(other)),
    }
}

/// Write `text` to `path`, where `-` means stdout.
pub fn write_text(path: &str, text: &str) -> Result<(), CliError> {
    if path == "-" {
        io::stdout().write_all(text.as_bytes())?;
    } else {
        fs::write(path, text)
            .map_err(|e| CliError::Invalid(format!("cannot write {path}: {e}")))?;
    }
    Ok(())
}

/// Load and validate a scenario JSON file.
pub fn read_scenario(path: &str) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read {path}: {e}")))?;
    let s: Scenario = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("{path} is not a scenario: {e}")))?;
    let errs = validate_scenario(&s);
    if !errs.is_empty() {
        return Err(CliError::Invalid(format!(
            "invalid scenario {path}: {}",
            errs.join("; ")
        )));
    }
    Ok(s)
}
