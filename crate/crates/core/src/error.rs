use thiserror::Error;

/// Errors raised anywhere in the block-diagonal recovery pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample {0} has zero norm")]
    ZeroColumn(usize),

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("affinity matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("vertex {0} has (near) zero degree; generalized eigenproblem is singular")]
    SingularDegree(usize),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("insertion position {position} out of range 1..={max}")]
    PositionOutOfRange { position: usize, max: usize },

    #[error("corruption combination has no closed-form prediction: {0}")]
    UnsupportedCorruptionCombination(String),

    #[error("every vertex is a Type I outlier")]
    AllOutliers,

    #[error("no sparse Laplacian candidate found; please start with a smaller threshold or a greater p")]
    NoSparseCandidate,

    #[error("changepoint input is degenerate: {0}")]
    DegenerateInput(String),

    #[error("no feasible candidate block sizes for K = {0}")]
    NoFeasibleCandidate(usize),

    #[error("segment is vertical; slope undefined")]
    VerticalSegment,

    #[error("no candidate block-size vectors to select from")]
    NoCandidates,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("no trials supplied")]
    EmptyTrials,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("eigen-decomposition failed to converge")]
    EigenFailure,
}

pub type Result<T> = std::result::Result<T, Error>;
