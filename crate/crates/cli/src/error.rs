use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, String),
    #[error("cannot parse {0}: {1}")]
    Parse(PathBuf, String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] agler_core::Error),
    /// A check ran to completion and failed; the report has been written.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use agler_core::Error as E;
        match self {
            CliError::Io(..) | CliError::Parse(..) | CliError::Config(_) => 2,
            CliError::Core(E::Input(_) | E::DegenerateInput(_) | E::UnstableDenominator(_) | E::CommonFactor) => 2,
            CliError::Core(_) | CliError::Failed(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        use agler_core::Error as E;
        match self {
            CliError::Io(..) => "io",
            CliError::Parse(..) => "parse",
            CliError::Config(_) => "config",
            CliError::Failed(_) => "check_failed",
            CliError::Core(e) => match e {
                E::DegenerateInput(_) => "degenerate_input",
                E::UnstableDenominator(_) => "unstable_denominator",
                E::CommonFactor => "common_factor",
                E::GridMismatch(..) => "grid_mismatch",
                E::NonDivisible { .. } => "non_divisible",
                E::InfeasibleIdentity(_) => "infeasible_identity",
                E::NotLoewnerMaximal(_) => "not_loewner_maximal",
                E::DegenerateFrame => "degenerate_frame",
                E::NotInModelSpace(_) => "not_in_model_space",
                E::NotHermitian(_) => "not_hermitian",
                E::InconsistentVerdict(_) => "inconsistent_verdict",
                E::Solver(_) => "solver",
                E::Input(_) => "input",
            },
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        })
    }
}
