use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} outside the supported range {1}")]
    DimensionOutOfRange(usize, &'static str),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("vertex {0:#b} is not in the face")]
    VertexNotInFace(u32),
    #[error("face is not contained in the source facet")]
    FaceNotInSource,
    #[error("empty vertex set")]
    EmptySet,
    #[error("invalid face handle ({dim}, {index})")]
    InvalidHandle { dim: usize, index: usize },
    #[error("foreign vertex id {0}")]
    ForeignVertex(usize),
    #[error("complex is not pure")]
    NotPure,
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("no facet-ridge path between the given facets")]
    NoPath,
    #[error("graph too small: {0}")]
    TrivialGraph(&'static str),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("search budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal contract violated at step {step}: {detail}")]
    Contract { step: &'static str, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(step: &'static str, detail: impl Into<String>) -> Error {
    Error::Contract {
        step,
        detail: detail.into(),
    }
}
