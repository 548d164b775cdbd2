use thiserror::Error;

use crate::orders::CaseTag;

/// Errors shared by every layer of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A valuation-shifting operation would leave fewer significant digits
    /// than the configured floor.
    #[error("precision exhausted: effective precision {effective} below floor {floor}")]
    PrecisionExhausted { effective: u32, floor: u32 },

    /// A computation was asked for more digits than the input carries.
    #[error("insufficient precision: requested exponent {requested} exceeds precision {available}")]
    InsufficientPrecision { requested: u32, available: u32 },

    /// Classification entry points refuse inputs below the working floor.
    #[error("precision too low: effective precision {effective}, classifiers require at least {required}")]
    PrecisionTooLow { effective: u32, required: u32 },

    /// The omega-action matrix does not satisfy its minimal relation.
    #[error("not an R-module: {0}")]
    NotAnRModule(String),

    /// Self-dual skew-Hermitian validation failed.
    #[error("invalid module: {0}")]
    InvalidModule(String),

    /// An operation specific to one splitting behaviour of the prime was
    /// called in the other one.
    #[error("wrong case: expected {expected:?}, found {found:?} (p = {p})")]
    WrongCase {
        expected: CaseTag,
        found: CaseTag,
        p: u64,
    },

    /// p = 2 or p = 1 mod 4: the order is maximal and outside the classifiers.
    #[error("the order is maximal for p = {0} (p = 2 or p = 1 mod 4); classifiers require p = 3 mod 4")]
    MaximalOrder(u64),

    /// Free-part invariants are only defined when no hyperbolic summand remains.
    #[error("not free: module still contains {0} split summand(s)")]
    NotFree(usize),

    #[error("singular input: {0}")]
    Singular(String),

    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    /// Combinatorial exhaustions are capped to keep runtimes bounded.
    #[error("exhaustion rejected for r = {r}: supported only for r <= {max}")]
    ExhaustionTooLarge { r: usize, max: usize },

    /// Internal consistency assertion derived from a proved statement failed;
    /// indicates a precision bug, not a caller error.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
