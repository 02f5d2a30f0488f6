use thiserror::Error;

/// Errors raised by the numerical engine and its loaders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty point configuration")]
    EmptyConfiguration,

    #[error("duplicate point at positions {first} and {second}")]
    DuplicatePoint { first: usize, second: usize },

    #[error("points are not strictly increasing at position {index}")]
    NotIncreasing { index: usize },

    #[error("requested {requested} points but the configuration holds {available}")]
    SizeOutOfRange { requested: usize, available: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// `pivot` is 1-based.
    #[error("matrix is not positive definite: pivot {pivot} = {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("kernel `{kernel}` cannot be evaluated at point {index}: {reason}")]
    DomainViolation {
        kernel: String,
        index: usize,
        reason: String,
    },

    #[error("matrix kernel is not symmetric at ({row}, {col})")]
    AsymmetricMatrix { row: usize, col: usize },

    #[error("integer overflow computing binomial data of order {n}")]
    IntegerOverflow { n: usize },

    #[error("point {point} is not a member of the configuration")]
    UnknownPoint { point: String },

    #[error("point mass at {point} has no finite norm certificate (scan diverged)")]
    SubsetMembershipUnverified { point: String },

    #[error("interpolation quadratic form {value:e} exceeds cap {cap:e}")]
    NormDivergent { value: f64, cap: f64 },

    #[error("invalid scan policy: {0}")]
    InvalidPolicy(String),

    #[error("graph is disconnected: vertex `{vertex}` is unreachable from the base point")]
    Disconnected { vertex: String },

    #[error("nonpositive conductance {value} on edge {u}-{v}")]
    NonpositiveConductance { u: String, v: String, value: f64 },

    #[error("self loop at vertex `{vertex}`")]
    SelfLoop { vertex: String },

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("the base point has no moment report")]
    BasePoint,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid kernel spec: {0}")]
    KernelSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
