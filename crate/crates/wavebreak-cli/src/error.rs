//! CLI error classification: every failure maps to a stable machine-readable
//! code and one of three exit classes (config = 2, data = 3, numerical = 4).

use std::fmt;
use wavebreak::Error as CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numerical => 4,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub class: ErrorClass,
    pub code: String,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(code: &str, message: impl Into<String>) -> Self {
        Self {
            class: ErrorClass::Config,
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn data(code: &str, message: impl Into<String>) -> Self {
        Self {
            class: ErrorClass::Data,
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn numerical(code: &str, message: impl Into<String>) -> Self {
        Self {
            class: ErrorClass::Numerical,
            code: code.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.message, self.code)
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let class = match &e {
            CoreError::InvalidParameter { .. }
            | CoreError::InvalidSpec(_)
            | CoreError::InfeasibleSearchSpace(_)
            | CoreError::AlphaOutOfRange { .. }
            | CoreError::ScaleBelowMinimum { .. }
            | CoreError::GammaTableMismatch(_) => ErrorClass::Config,
            CoreError::WindowOutOfRange { .. }
            | CoreError::TooFewBlocks { .. }
            | CoreError::DegenerateSegment { .. }
            | CoreError::AllSegmentsUnusable { .. } => ErrorClass::Data,
            CoreError::EmbeddingFailed { .. }
            | CoreError::SingularDesign(_)
            | CoreError::NotPositiveDefinite(_)
            | CoreError::Numerical(_) => ErrorClass::Numerical,
        };
        Self {
            class,
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}
