use thiserror::Error;

pub type Result<T, E = WcsError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum WcsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid cost matrix: {0}")]
    InvalidCost(String),

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("invalid problem instance: {0}")]
    InvalidInstance(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("enumeration of {count} candidates exceeds the cap of {cap}")]
    EnumerationCap { count: u128, cap: u128 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for WcsError {
    fn from(e: serde_json::Error) -> Self {
        WcsError::Parse(e.to_string())
    }
}

impl From<csv::Error> for WcsError {
    fn from(e: csv::Error) -> Self {
        WcsError::Parse(e.to_string())
    }
}
