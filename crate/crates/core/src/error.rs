use thiserror::Error;

/// Errors raised by the simulation, fitting and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("spin index {index} out of range for a {n_spins}-spin system")]
    SpinIndex { index: usize, n_spins: usize },

    #[error("invalid spin pair ({0}, {1})")]
    InvalidPair(usize, usize),

    #[error("invalid spin system: {0}")]
    InvalidSystem(String),

    #[error("invalid density state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("expectation value has a non-negligible imaginary part {0:e}")]
    ComplexExpectation(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("integration step underflow: {0}")]
    StepUnderflow(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("unphysical round-trip fraction {0} (must lie in [0, 0.5])")]
    UnphysicalFraction(f64),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { field: field.into(), message: message.into() }
    }

    /// True for errors caused by the caller's input rather than by a
    /// numerical failure during computation.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::NotHermitian(_)
                | Error::ComplexExpectation(_)
                | Error::StepUnderflow(_)
                | Error::Numerical(_)
                | Error::InvalidState(_)
        )
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {value}"),
        })
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be non-negative and finite, got {value}"),
        })
    }
}
