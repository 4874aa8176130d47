use alloc::string::String;
use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Caller-supplied data or configuration violates a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value {value} lies outside the open domain of {transform}")]
    Domain { value: f64, transform: String },

    #[error("log target is not finite at the current state (got {0})")]
    NonFiniteTarget(f64),

    #[error(
        "{context}: matrix is not positive definite even with jitter {max_jitter:e}; \
         diagonal spans [{min_diag:e}, {max_diag:e}]"
    )]
    NotPositiveDefinite {
        context: &'static str,
        max_jitter: f64,
        min_diag: f64,
        max_diag: f64,
    },

    #[error("singular design: cross-product has rank {rank} of {dim}")]
    SingularDesign { rank: usize, dim: usize },

    #[error("{context}: non-positive rate parameter {rate}")]
    NonPositiveRate { context: &'static str, rate: f64 },

    #[error("Kalman filter produced one-step variance {q} at t = {t}")]
    NonPositiveVariance { t: usize, q: f64 },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("refusing oversized request: {0}")]
    TooLarge(String),

    #[error("predictive distribution sums to {0}, not 1")]
    Normalization(f64),
}

impl Error {
    /// True for errors caused by bad input rather than a numerical failure
    /// inside a sampler.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Domain { .. } | Error::TooLarge(_)
        )
    }
}

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidInput(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
