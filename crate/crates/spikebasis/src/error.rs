use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least {min}, got {got}")]
    InvalidDimension { min: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sample count must be at least 1")]
    EmptySample,

    #[error("length {0} is not a power of two")]
    NonDyadicLength(usize),

    #[error("depth {depth} out of range (max {max})")]
    DepthOutOfRange { depth: usize, max: usize },

    #[error("node ({level}, {pos}) out of range")]
    NodeOutOfRange { level: usize, pos: usize },

    #[error("matrix is singular or nearly so (|det| = {det:.3e})")]
    Singular { det: f64 },

    #[error("{what} = {value} outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("selection does not tile the leaf index space")]
    InvalidCover,

    #[error("n0 = {0} exceeds the enumeration guard (max 5); use the unguarded constructor")]
    EnumerationGuard(usize),

    #[error("filters fail the conjugate-mirror conditions (max residual {residual:.3e})")]
    NotConjugateMirror { residual: f64 },

    #[error("Karhunen-Loeve characterizations disagree (diagonalizes: {eigen}, dc column: {dc})")]
    KlbDisagreement { eigen: bool, dc: bool },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
