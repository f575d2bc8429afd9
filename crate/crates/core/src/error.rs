use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("ragged row at line {line}")]
    RaggedRow { line: usize },
    #[error("unexpected character {found:?} at line {line}")]
    BadCharacter { line: usize, found: char },
    #[error("empty table")]
    Empty,
}

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("empty fiber sample")]
    EmptySample,
    #[error("need at least {needed} trials, got {got}")]
    TooFewTrials { needed: usize, got: usize },
    #[error("all importance weights are zero")]
    AllWeightsZero,
    #[error("grid has {cells} cells, exceeding the enumeration cap of {cap}")]
    CapExceeded { cells: usize, cap: usize },
    #[error("fiber is empty")]
    EmptyFiber,
    #[error("vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("table is not in the fiber: expected {expected:?}, found {found:?}")]
    OffFiber {
        expected: crate::grid::SuffStats,
        found: crate::grid::SuffStats,
    },
    #[error("table shape {found} does not match {expected}")]
    ShapeMismatch {
        expected: crate::grid::Shape,
        found: crate::grid::Shape,
    },
    #[error("cell {0} is already determined")]
    CellDetermined(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
