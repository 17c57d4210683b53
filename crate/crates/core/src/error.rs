use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative or adaptive numerical procedure failed to converge.
    #[error("numerical error: {message} (residual {residual:.3e})")]
    Numerical { message: String, residual: f64 },

    /// The requested step violates the per-step phase guard.
    #[error("step size too large: nonlinear phase per step {phase:.3e} rad exceeds {limit} rad")]
    StepSize { phase: f64, limit: f64 },

    /// A propagated field developed a non-finite sample.
    #[error("numerical blowup at step {step}")]
    Blowup { step: usize },

    /// Invalid configuration; `field` names the offending entry.
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// A quantity cannot be measured from the data (lost wavepacket, vacuum on a loop).
    #[error("measurement failed: {0}")]
    Measurement(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
