use thiserror::Error;

/// Domain errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("NotAUnit: element has positive valuation or is zero at working precision")]
    NotAUnit,
    #[error("NotOrdinary: trace is divisible by p")]
    NotOrdinary,
    #[error("DenominatorNotCleared: evaluated value has insufficient valuation to clear p^{0}")]
    DenominatorNotCleared(u32),
    #[error("HypothesisFailed: mu(f(t_0,0,...,0)) differs from mu(f)")]
    HypothesisFailed,
    #[error("PrecisionExhausted: {0}")]
    PrecisionExhausted(&'static str),
    #[error("InconsistentFlags: {0}")]
    InconsistentFlags(&'static str),
    #[error("DaggerVanishes: omega kills the dagger element")]
    DaggerVanishes,
    #[error("NotDivisibleBy12: deg(Delta) = {0}")]
    NotDivisibleBy12(i64),
    #[error("IntegralityViolation: norm descent produced a coefficient outside Z_p")]
    IntegralityViolation,
    #[error("SearchExhausted: retry budget of {0} spent")]
    SearchExhausted(u64),
    #[error("CharTooSmall: residue characteristic {0} <= 3")]
    CharTooSmall(u64),
    #[error("MixedRings: operands live in different rings")]
    MixedRings,
    #[error("BadInput: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
