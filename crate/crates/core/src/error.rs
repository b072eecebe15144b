use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },

    #[error("qubit count {0} is out of range (1..={1})")]
    QubitsOutOfRange(usize, usize),

    #[error("invalid Pauli string: {0}")]
    ParsePauli(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("empty k schedule: stepsize {stepsize} exceeds C/dw = {ratio}")]
    EmptySchedule { stepsize: f64, ratio: f64 },

    #[error("parameter vector has length {got}, circuit expects {expected}")]
    ParamLength { got: usize, expected: usize },

    #[error("observable is not Hermitian (imaginary part {0:e})")]
    NonHermitian(f64),

    #[error("generator {0} has weight above 2 and cannot be decomposed")]
    GeneratorWeight(String),

    #[error("no cover of all items exists using the supplied feasible blocks")]
    CoverInfeasible,

    #[error("{what} needs n <= {cap}, instance has n = {n}")]
    CapExceeded { what: &'static str, n: usize, cap: usize },

    #[error("count overflow while computing {0}")]
    Overflow(&'static str),

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
