use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value {value} at node {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("time step violates the stability constraint: {0}")]
    Stability(String),

    #[error("support constraint violated: {0}")]
    Support(String),

    #[error("ODE integration failed: {0}")]
    Integration(String),
}

impl LabError {
    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        LabError::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
