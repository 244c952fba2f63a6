use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at column {position}: expected {expected}")]
    Syntax { position: usize, expected: String },

    #[error("negative exponent at column {position}")]
    NegativeExponent { position: usize },

    #[error("numeric overflow (modulus exceeded 1e300)")]
    Overflow,

    #[error("term explosion: {terms} terms exceeds cap of {cap}")]
    TermExplosion { terms: usize, cap: usize },

    #[error("term explosion while forming iterate pair (m = {m}, n = {n}): {terms} terms exceeds cap of {cap}")]
    IterateCap { m: u32, n: u32, terms: usize, cap: usize },

    #[error("invalid factor {index}: {reason}")]
    InvalidFactor { index: usize, reason: String },

    #[error("leading coefficient mismatch for {which}: formula {formula} vs symbolic {symbolic}")]
    CoefficientMismatch {
        which: &'static str,
        formula: String,
        symbolic: String,
    },

    #[error("no filtration radius up to {cap} passed validation")]
    RadiusSearchFailed { cap: f64 },

    #[error("tolerance {tol:e} unreachable before the overflow guard (value {value}, error bound {error_bound:e})")]
    ToleranceUnreachable {
        value: f64,
        error_bound: f64,
        tol: f64,
    },

    #[error("branch condition |q/(c y^d)| < 1 failed at step {step} (modulus {modulus})")]
    BranchDomainViolation { step: u32, modulus: f64 },

    #[error("point is not in the filtration region")]
    NotInFiltration,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("map file: {0}")]
    MapFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
