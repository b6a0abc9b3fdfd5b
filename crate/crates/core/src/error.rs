use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(usize, usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("edge {0} -> {1} has invalid weight {2}")]
    InvalidWeight(usize, usize, f64),
    #[error("node index {index} out of range for {node_count} nodes")]
    NodeOutOfRange { index: usize, node_count: usize },
    #[error("graph is empty")]
    EmptyGraph,
    #[error("graph is not weakly connected")]
    NotWeaklyConnected,
    #[error("node {0} has zero degree")]
    ZeroDegreeNode(usize),
    #[error("not a permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension {dim} exceeds dense limit {limit}; use the KPM estimator instead")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("spectrum has no eigenvectors")]
    MissingEigenvectors,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid probability simplex: {0}")]
    InvalidSimplex(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
