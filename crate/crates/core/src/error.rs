use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coupling on edge {edge} is negative ({value})")]
    NegativeCoupling { edge: usize, value: f64 },

    #[error("field on vertex {vertex} is negative ({value})")]
    NegativeField { vertex: String, value: f64 },

    #[error("non-finite parameter: {0}")]
    NonFinite(String),

    #[error("number of states q must be at least 2, got {0}")]
    BadQ(usize),

    #[error("bad edge: {0}")]
    BadEdge(String),

    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),

    #[error("duplicate vertex {0:?}")]
    DuplicateVertex(String),

    #[error("region lists vertex {0:?} more than once")]
    RepeatedRegionVertex(String),

    #[error("spin function has {got} values, model has q = {expected}")]
    FunctionLength { expected: usize, got: usize },

    #[error("enumeration of {size} configurations exceeds the cap of {cap}")]
    EnumerationTooLarge { size: f64, cap: u64 },

    #[error("family C values rejected: {0}")]
    BadFamilyC(String),

    #[error("function is not certified for this claim: {0}")]
    NotCertified(String),

    #[error("functions do not have disjoint support (f0*f1 nonzero at state {0})")]
    NotDisjoint(usize),

    #[error("bad sampling window: {0}")]
    BadWindow(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
