use thiserror::Error;

/// Errors raised by the model evaluators, integrators and analysis tools.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SoaringError {
    #[error("non-finite input for {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("model singularity at state {state:?}: {reason}")]
    Singularity { state: Vec<f64>, reason: String },

    #[error("bracket expression `{expr}` exceeds the maximum depth {max}")]
    DepthExceeded { expr: String, max: usize },

    #[error("cannot parse bracket expression `{input}`: {reason}")]
    BracketParse { input: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unsupported truncation order {order} (maximum {max})")]
    OrderTooHigh { order: usize, max: usize },

    #[error("solution diverged at t = {time}")]
    Diverged { time: f64 },

    #[error("empty overlap between trajectory time ranges")]
    EmptyOverlap,

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("i/o error on {path}: {reason}")]
    Io { path: String, reason: String },

    #[error("malformed input: {0}")]
    Format(String),
}

impl SoaringError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl SoaringError {
    pub fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Self::Io {
            path: path.display().to_string(),
            reason: err.to_string(),
        }
    }

    /// Process exit status: 2 for numerical failures, 1 for everything
    /// attributable to the inputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::NonFinite(_) | Self::Singularity { .. } | Self::Diverged { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, SoaringError>;
