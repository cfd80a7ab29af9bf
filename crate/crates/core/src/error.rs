use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size limit exceeded: {what} is {actual}, limit is {limit}")]
    SizeLimitExceeded {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("parse error{}: {message}", fmt_position(*.position))]
    Parse {
        message: String,
        /// Line and column (1-based) when the input is not valid JSON.
        position: Option<(usize, usize)>,
    },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("decoration kinds differ: {0} vs {1}")]
    KindMismatch(String, String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("nothing to rotate: partition has no upper points")]
    NothingToRotate,

    #[error("implementation {implementation} does not apply to {kind} partitions")]
    UnsupportedImpl { implementation: String, kind: String },

    #[error("unsupported category: {0}")]
    UnsupportedCategory(String),

    #[error("precondition failed: {0}")]
    PrecondFailed(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

fn fmt_position(position: Option<(usize, usize)>) -> String {
    match position {
        Some((line, column)) => format!(" at line {line}, column {column}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Resolves a guardrail, honouring the `EASYQ_MAX_POINTS` override.
pub(crate) fn guard_limit(default: usize) -> usize {
    std::env::var("EASYQ_MAX_POINTS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(default)
}

pub(crate) fn check_limit(what: &'static str, actual: usize, default: usize) -> Result<()> {
    let limit = guard_limit(default);
    if actual > limit {
        Err(Error::SizeLimitExceeded {
            what,
            actual,
            limit,
        })
    } else {
        Ok(())
    }
}
