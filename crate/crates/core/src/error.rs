use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid subsystem: {0}")]
    InvalidSubsystem(String),
    #[error("factor index {index} out of range for a space with {len} factors")]
    FactorIndex { index: usize, len: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{what} = {value} exceeds the cap {cap}")]
    DimensionCap { what: &'static str, value: usize, cap: usize },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("trace drifted by {drift:e} at t = {t}")]
    TraceDrift { t: f64, drift: f64 },
    #[error("steady state is not unique: null-space directions differ by {separation:e}")]
    DegenerateNullSpace { separation: f64 },
    #[error("steady state has eigenvalue {0:e} below the positivity floor")]
    NotPositive(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
