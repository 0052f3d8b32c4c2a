use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("expected {expected} entries, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("rows are linearly dependent over Q")]
    RankDeficient,
    #[error("zero vector has no primitive representative")]
    ZeroVector,
    #[error("vector {index} is not primitive")]
    NotPrimitive { index: usize },
    #[error("vectors {first} and {second} span the same line")]
    ProportionalPair { first: usize, second: usize },
    #[error("matrix is not symmetric at entry ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("form is not positive definite")]
    NotPositiveDefinite,
    #[error(
        "form is not perfect: its minimal vectors span a cone of dimension {dimension} < {full}"
    )]
    NotPerfect { dimension: usize, full: usize },
    #[error("configuration does not span its ambient space (rank {rank} < {dim})")]
    NotSpanning { rank: usize, dim: usize },
    #[error("configuration is empty")]
    EmptyConfig,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("realizability test exceeded {cap} constraint additions")]
    IterationCap { cap: usize },
    #[error("cannot pad a cone in dimension {from} to dimension {to}")]
    PadTooSmall { from: usize, to: usize },
    #[error("target dimension {target} unsupported for g={g}; only g+1 is supported")]
    UnsupportedTarget { g: usize, target: usize },
    #[error("no built-in perfect domains for g={0}")]
    NoBuiltinDomains(usize),
    #[error("claim violated: {claim}; offending face: {face}")]
    ClaimViolated { claim: String, face: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
