use thiserror::Error;

#[derive(Debug, Error)]
pub enum RspError {
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("edge {edge}: {what} must be a finite non-negative real, got {value}")]
    BadWeight {
        edge: usize,
        what: &'static str,
        value: f64,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("path recovery unavailable: {0}")]
    NoProvenance(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RspError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(RspError::InvalidParameter(msg.into()))
}
