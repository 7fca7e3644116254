use thiserror::Error;

/// Errors raised by the workbench. Structural problems in a machine are not
/// errors: they are reported as data by [`crate::models::validate`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("zero vector")]
    ZeroVector,
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("symbol `{0}` is not in the input alphabet")]
    UnknownSymbol(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("invalid machine: {0}")]
    InvalidMachine(String),
    #[error("non-halting mass {mass:.3e} left outside accepting and rejecting states")]
    NonHalting { mass: f64 },
    #[error("branch cap of {cap} exceeded")]
    BranchCapExceeded { cap: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parameter search exhausted: {0}")]
    SearchExhausted(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
