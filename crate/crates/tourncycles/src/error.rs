use thiserror::Error;

use crate::tournament::Violation;
use crate::trn::TrnError;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tournament: {}", format_violations(.0))]
    InvalidTournament(Vec<Violation>),
    #[error(transparent)]
    Trn(#[from] TrnError),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("infeasible instance: rho {rho} is below rho_min {rho_min} for s3 {s3}")]
    Infeasible { s3: f64, rho: f64, rho_min: f64 },
}

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

fn format_violations(violations: &[Violation]) -> String {
    let shown: Vec<String> = violations.iter().take(8).map(|v| v.to_string()).collect();
    let mut out = shown.join("; ");
    if violations.len() > 8 {
        out.push_str(&format!("; ... ({} total)", violations.len()));
    }
    out
}

pub type Result<T> = std::result::Result<T, Error>;
