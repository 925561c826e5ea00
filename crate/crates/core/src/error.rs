use thiserror::Error;

use crate::graph::TdViolation;

/// Errors reported by the estimators and their supporting data structures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("size cap exceeded: {what} = {value} > {cap}")]
    CapExceeded { what: &'static str, value: usize, cap: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("graph is not 2-degenerate")]
    NotTwoDegenerate,
    #[error("graph has no planar embedding; use partition_heuristic")]
    MissingEmbedding,
    #[error("edge {0}-{1} not present")]
    MissingEdge(usize, usize),
    #[error("invalid tree decomposition: {0}")]
    InvalidTreeDecomposition(TdViolation),
    #[error("cycle detected in tree-local function")]
    CycleDetected,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("distribution has no valid output")]
    NoValidOutput,
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
