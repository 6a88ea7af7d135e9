use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid conductor {n}: {reason}")]
    InvalidConductor { n: u64, reason: String },

    #[error("conductor mismatch: {left} vs {right}")]
    ConductorMismatch { left: u64, right: u64 },

    #[error("{r} is not a unit modulo {n}")]
    InvalidGaloisIndex { r: u64, n: u64 },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("generators do not span a full-rank lattice")]
    RankDeficient,

    #[error("valuation of zero is infinite")]
    ZeroElement,

    #[error("element is not a unit (norm {0})")]
    NotAUnit(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resource cap exceeded: requested {requested}, cap is {cap}")]
    ResourceCap { requested: u128, cap: u128 },

    #[error("integer {0} exceeds the supported factoring range (< 2^128)")]
    FactoringCapacity(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("shape of {shape} offsets does not fit: {reason}")]
    ShapeMismatch { shape: usize, reason: String },

    #[error("no a_q candidate found in 0..={a_bound}")]
    NotFound { a_bound: u64 },

    #[error("invalid candidate: {0}")]
    InvalidCandidate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
