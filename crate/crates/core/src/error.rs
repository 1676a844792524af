use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unusable hierarchy: {0}")]
    InvalidHierarchy(String),
    #[error("index {index} out of range (size {size})")]
    OutOfRange { index: usize, size: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite input component at index {0}")]
    NonFinite(usize),
    #[error("empty box at component {index}: lower {lower} > upper {upper}")]
    EmptyBox { index: usize, lower: f64, upper: f64 },
    #[error("infeasible iterate on level {level}, component {index}: violation {violation:e}")]
    Infeasible { level: usize, index: usize, violation: f64 },
    #[error("problem `{problem}` requires Dirichlet set {expected}")]
    WrongDirichlet { problem: &'static str, expected: &'static str },
    #[error("unknown problem `{0}` (expected membrane, ignition or morebv)")]
    UnknownProblem(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
