use thiserror::Error;

/// Errors raised by the library. Every variant describes bad input or a
/// precondition the caller violated; none of them indicate an internal bug.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{value} is not a unit modulo {modulus}")]
    NotUnit { value: i128, modulus: u64 },

    #[error("no primitive roots exist modulo {0}")]
    NoPrimitiveRoots(u64),

    #[error("zero has no p-adic unit part")]
    ZeroValue,

    #[error("modulus {base}^{exponent} does not fit in 63 bits")]
    ModulusOverflow { base: u64, exponent: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("degenerate Lucas parameters (r = {r}, s = {s})")]
    DegenerateLucas { r: i64, s: i64 },

    #[error("p-adic valuation of term {index} is at least {precision} (p = {prime}); precision exhausted")]
    PrecisionExhausted { prime: u64, index: u64, precision: u32 },

    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),

    #[error("greedy search found no admissible element below {limit}")]
    SearchExhausted { limit: u64 },

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
