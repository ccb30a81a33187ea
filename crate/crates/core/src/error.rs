use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("dimension {dim} is not supported here (at most {max})")]
    UnsupportedDimension { dim: usize, max: usize },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),
    #[error("model `{0}` has no closed-form conditional expectation here")]
    NoOracle(String),
    #[error("initial law has no closed-form density: {0}")]
    UnsupportedLaw(String),
    #[error("strategy `{strategy}` requires a compactly supported kernel, got `{kernel}`")]
    StrategyUnsupported {
        strategy: &'static str,
        kernel: String,
    },
    #[error("simulation diverged at step {step}: {what}")]
    SimulationDiverged { step: u64, what: String },
    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },
    #[error("covariance is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("quadrature domain too narrow: tail mass {tail_mass:e} exceeds {tolerance:e}")]
    DomainTruncated { tail_mass: f64, tolerance: f64 },
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("sample {value} outside the histogram range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
