//! Command-line front end: JSON run configurations, presets and output.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;

use lfscat_core::Error;
use serde_json::json;

/// Failure of a run, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    /// 1 for output failures, 2 for invalid input, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Core(e) => match e {
                Error::InvalidConfig(_)
                | Error::ForbiddenAngle(_)
                | Error::OutOfValidity { .. }
                | Error::DimensionMismatch(_)
                | Error::ProfileDefinition(_)
                | Error::MomentOrder(_)
                | Error::Extent { .. } => 2,
                Error::Numerics(_)
                | Error::Singular(_)
                | Error::SeriesNoConvergence { .. }
                | Error::DivisionByZero(_)
                | Error::Infeasible(_) => 3,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            1 => "io",
            2 => "validation",
            _ => "numerical",
        }
    }

    /// Machine-readable diagnostic for stderr.
    pub fn diagnostic(&self) -> serde_json::Value {
        let messages = match self {
            CliError::Validation(v) => v.clone(),
            other => vec![other.to_string()],
        };
        json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "messages": messages,
        })
    }
}
