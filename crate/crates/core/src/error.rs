use thiserror::Error;

use crate::diagram::SpiderId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("invalid phase `{0}`: expected n, n/d with d a power of two, or n/2^k")]
    Phase(String),
    #[error("line {line}: {msg}")]
    Circuit { line: usize, msg: String },
    #[error("diagram file: {0}")]
    Diagram(String),
    #[error("flow file: {0}")]
    Flow(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("qubit index {qubit} out of range for a {qubit_count}-qubit circuit")]
    QubitOutOfRange { qubit: usize, qubit_count: usize },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("unknown spider {0}")]
    UnknownSpider(SpiderId),
    #[error("rewrite `{rule}` does not apply: {reason}")]
    RewriteMismatch { rule: &'static str, reason: String },
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("comparison is indeterminate: both tensors are zero")]
    Indeterminate,
    #[error("diagram is not semi-graph-like: {0}")]
    NotSemiGraphLike(String),
    #[error("diagram is not graph-like: {0}")]
    NotGraphLike(String),
    #[error("spider {0} cannot reach any output")]
    Unreachable(SpiderId),
    #[error("no Pauli flow exists for this diagram")]
    NoFlow,
    #[error("invalid flow: {0}")]
    InvalidFlow(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("insufficient samples: {got} < {needed}")]
    InsufficientSamples { got: usize, needed: usize },
    #[error("leakage profiles differ; the comparison would be vacuous")]
    ProfileMismatch,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
