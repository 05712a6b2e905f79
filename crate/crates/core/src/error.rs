use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("symplectic matrix is not free: |det B| = {det_b:e}")]
    NotFree { det_b: f64 },
    #[error("matrix block is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("shift {shift} is not an integer multiple of the grid spacing")]
    OffGrid { shift: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{what} is only implemented for dimension {supported}, got {found}")]
    DimensionUnsupported {
        what: &'static str,
        supported: &'static str,
        found: usize,
    },
    #[error("flow path from 0 to t = {time} could not be split into free steps")]
    PathThroughExceptional { time: f64 },
    #[error("no band radius reaches epsilon = {epsilon:e} (best tail {best:e})")]
    EpsilonTooSmall { epsilon: f64, best: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("t = {time} is not an exceptional time (|det B| = {det_b:e})")]
    NotExceptional { time: f64, det_b: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Variant name, for reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotFree { .. } => "NotFree",
            Error::IllConditioned { .. } => "IllConditioned",
            Error::OffGrid { .. } => "OffGrid",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DimensionUnsupported { .. } => "DimensionUnsupported",
            Error::PathThroughExceptional { .. } => "PathThroughExceptional",
            Error::EpsilonTooSmall { .. } => "EpsilonTooSmall",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::NotExceptional { .. } => "NotExceptional",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
