use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(String, String),
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),
    #[error("invalid expression: {0}")]
    InvalidExpression(String),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("{0} is not a unit")]
    NotAUnit(String),
    #[error("expansion table unavailable for d={d}, support {n}")]
    TableUnavailable { d: usize, n: usize },
    #[error("no integral expansion found for d={d}, n={n}, multidegree {alpha:?}")]
    NoIntegralExpansion { d: usize, n: usize, alpha: Vec<u32> },
    #[error("not GL-valued: {0}")]
    NotGlValued(String),
    #[error("inconsistent linear system")]
    InconsistentSystem,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("serialization: {0}")]
    Serialization(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
