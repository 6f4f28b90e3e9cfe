use randlab_core::logic::{EvalError, ParseError};
use randlab_core::measure::{ExtensionError, MeasureError};
use randlab_core::randomizer::{CFormulaError, RandError, SimpleError};
use randlab_core::rtype::RtypeError;
use randlab_core::stability::StabilityError;
use thiserror::Error;

/// Failures that stop a command before it can report.
#[derive(Debug, Error)]
pub enum CliError {
    /// A name, file or argument that does not resolve to a usable object.
    #[error("{0}")]
    Resolution(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Resolution(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Budget(_) => 4,
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<CFormulaError> for CliError {
    fn from(e: CFormulaError) -> Self {
        match e {
            CFormulaError::Parse(p) => p.into(),
            CFormulaError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Resolution(other.to_string()),
        }
    }
}

impl From<RtypeError> for CliError {
    fn from(e: RtypeError) -> Self {
        match e {
            RtypeError::Parse(p) => p.into(),
            other => CliError::Resolution(other.to_string()),
        }
    }
}

impl From<ExtensionError> for CliError {
    fn from(e: ExtensionError) -> Self {
        match e {
            ExtensionError::Format { .. } => CliError::Parse(e.to_string()),
            other => CliError::Resolution(other.to_string()),
        }
    }
}

macro_rules! resolution {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Resolution(e.to_string())
            }
        })*
    };
}

resolution!(EvalError, MeasureError, RandError, SimpleError, StabilityError);
