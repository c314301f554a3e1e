use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ambient dimension must be positive")]
    ZeroDimension,

    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix has {got} entries, expected {expected}")]
    BadShape { expected: usize, got: usize },

    #[error("matrix entry is not finite")]
    NonFinite,

    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),

    #[error("order table is not a partial order: {0}")]
    NotPartialOrder(String),

    #[error("not a lattice: {0}")]
    NotLattice(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("quantale carries no topology")]
    MissingTopology,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("duplicate element at positions {0} and {1}")]
    DuplicateElement(usize, usize),

    #[error("lattice is not distributive: witness ({0}, {1}, {2})")]
    NotDistributive(usize, usize, usize),

    #[error("invalid groupoid: {0}")]
    InvalidGroupoid(String),

    #[error("carrier too large: {0}")]
    TooLarge(String),

    #[error("map does not preserve unions: {0}")]
    NotUnionPreserving(String),

    #[error("element is not in the ambient: {0}")]
    OutsideAmbient(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
