use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    IndexOutOfRange { index: usize, n_qubits: usize },
    #[error("duplicate index {0}")]
    DuplicateIndex(usize),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("size cap exceeded: {what} = {value} > {cap}")]
    SizeCap { what: &'static str, value: u128, cap: u128 },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("outcome has zero probability")]
    ZeroProbability,
    #[error("{0} is not an odd prime")]
    NotOddPrime(i64),
    #[error("{0} is not a prime")]
    NotPrime(i64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate normalization: 1 - sin^(2m)(theta) = {0}")]
    DegenerateNormalization(f64),
    #[error("operator is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("tree with {layers} layers is too shallow for {d_layers} small-tree layers")]
    TreeTooShallow { layers: usize, d_layers: usize },
    #[error("unknown gate name {0:?}")]
    UnknownGate(String),
    #[error("targets overlap in layer {layer} on qubit {qubit}")]
    OverlappingTargets { layer: usize, qubit: usize },
    #[error("incompatible size: {0}")]
    Incompatible(String),
    #[error("independent evaluations disagree: {0}")]
    OracleDisagreement(String),
    #[error("parse error: {0}")]
    Parse(String),
}
