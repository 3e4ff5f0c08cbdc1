use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid constraint set: {0}")]
    InvalidSet(String),

    #[error("euclidean projection is not supported for {0}")]
    UnsupportedProjection(&'static str),

    #[error("projection root-finder did not converge after {0} iterations")]
    ProjectionDiverged(usize),

    #[error("point is not on the boundary (|w'Qw - 1| = {0:e})")]
    NotOnBoundary(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("learner {learner} needs a known horizon")]
    MissingHorizon { learner: &'static str },

    #[error("round {t} is past the horizon {n}")]
    PastHorizon { t: usize, n: usize },

    #[error("(A,B)-prod loss difference {delta:.6} escapes [-1, 1]; scale C = {scale} is too small")]
    ScaleTooSmall { delta: f64, scale: f64 },

    #[error("prediction left the constraint set at round {t} (violation {violation:e})")]
    OutsideSet { t: usize, violation: f64 },

    #[error("trace was not produced by follow-the-leader (missing w_(n+1))")]
    NotLeaderTrace,

    #[error("{0}")]
    Degenerate(String),

    #[error("csv output: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
