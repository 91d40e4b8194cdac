//! Error and warning types shared by all modules.

use serde::{Deserialize, Serialize};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error(
        "circulant embedding failed: eigenvalue {min_eigenvalue:.3e} below \
         tolerance (max {max_eigenvalue:.3e})"
    )]
    EmbeddingFailed {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("scale {scale} below minimum admissible scale {min_scale}")]
    ScaleBelowMinimum { scale: f64, min_scale: f64 },

    #[error("coefficient window [{lo}, {hi}] not inside [0, {n}]")]
    WindowOutOfRange { lo: f64, hi: f64, n: usize },

    #[error("segment [{k}, {k_prime}) has {blocks} block(s) at scale {scale}; need at least 2")]
    TooFewBlocks {
        k: usize,
        k_prime: usize,
        scale: usize,
        blocks: usize,
    },

    #[error("degenerate segment [{k}, {k_prime}): sample variance {value} is not positive")]
    DegenerateSegment {
        k: usize,
        k_prime: usize,
        value: f64,
    },

    #[error("singular regression design: {0}")]
    SingularDesign(String),

    #[error("infeasible search space: {0}")]
    InfeasibleSearchSpace(String),

    #[error("all refined segments are unusable (margin {margin} too large)")]
    AllSegmentsUnusable { margin: usize },

    #[error("exponent alpha = {alpha} outside the {regime} range ({lo}, {hi})")]
    AlphaOutOfRange {
        alpha: f64,
        regime: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("covariance matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("gamma table mismatch: {0}")]
    GammaTableMismatch(String),
}

impl Error {
    /// Short machine-readable code, stable across releases.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::EmbeddingFailed { .. } => "embedding_failed",
            Error::ScaleBelowMinimum { .. } => "scale_below_minimum",
            Error::WindowOutOfRange { .. } => "window_out_of_range",
            Error::TooFewBlocks { .. } => "too_few_blocks",
            Error::DegenerateSegment { .. } => "degenerate_segment",
            Error::SingularDesign(_) => "singular_design",
            Error::InfeasibleSearchSpace(_) => "infeasible_search_space",
            Error::AllSegmentsUnusable { .. } => "all_segments_unusable",
            Error::AlphaOutOfRange { .. } => "alpha_out_of_range",
            Error::NotPositiveDefinite(_) => "not_positive_definite",
            Error::Numerical(_) => "numerical",
            Error::GammaTableMismatch(_) => "gamma_table_mismatch",
        }
    }
}

/// Non-fatal events recorded alongside results.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum WarningCode {
    DegenerateCost,
    FglsFallbackToOls,
    UnusableSegment,
    AlphaClamped,
    SpreadClamped,
    TruncationTail,
    ReplicateFailed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub code: WarningCode,
    pub message: String,
}

impl Warning {
    pub fn new(code: WarningCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}
