use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix dimension {0} must be even and between 2 and {max}", max = crate::matrix::MAX_DIM)]
    InvalidDimension(usize),

    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not Hermitian (max defect {0:e})")]
    NotHermitian(f64),

    #[error("matrix does not commute with the complex structure (max |MJ - JM| = {0:e})")]
    NotJCommuting(f64),

    #[error("projected matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("perturbation is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("{routine} did not converge within {limit} iterations")]
    NoConvergence { routine: &'static str, limit: usize },

    #[error("resolution {0} is too coarse (minimum 8)")]
    ResolutionTooCoarse(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),

    #[error("{0}")]
    Parse(#[from] ParseError),

    #[error("missing required key `{0}`")]
    MissingKey(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// A parse failure with its source position. `line` is 1-based; `column`
/// is the 1-based whitespace-separated field when known.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}", self.render())]
pub struct ParseError {
    pub line: usize,
    pub column: Option<usize>,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column: None,
            message: message.into(),
        }
    }

    pub fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column: Some(column),
            message: message.into(),
        }
    }

    fn render(&self) -> String {
        match self.column {
            Some(c) => format!("line {}, column {}: {}", self.line, c, self.message),
            None => format!("line {}: {}", self.line, self.message),
        }
    }
}
