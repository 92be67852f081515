use thiserror::Error;

/// Errors raised anywhere in the construction and correction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group table: {0}")]
    InvalidGroup(String),

    #[error("invalid homomorphism: {0}")]
    InvalidHom(String),

    #[error("not a representation: {0}")]
    NonRepresentation(String),

    #[error("irrep computation failed after {attempts} attempts: {detail}")]
    IrrepClustering { attempts: usize, detail: String },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error(
        "matrix is rank deficient (smallest singular value {smallest:e}, largest {largest:e})"
    )]
    RankDeficient { smallest: f64, largest: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("representations are not isomorphic: multiplicities {left:?} vs {right:?}")]
    NotIsomorphic { left: Vec<i64>, right: Vec<i64> },

    #[error("multiplicity mismatch: {0}")]
    MultiplicityMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("integer program exceeded node cap {cap} ({explored} nodes explored)")]
    SolverLimit { cap: usize, explored: usize },

    #[error("linear relaxation failed: {0}")]
    Solver(String),

    #[error("measured defect {delta:.3e} exceeds guard {guard}")]
    Guard { delta: f64, guard: f64 },

    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
