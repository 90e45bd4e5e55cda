use thiserror::Error;

/// Errors produced by the channel model, the integrators and the simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error(
        "quadrature did not converge: value {value:e}, error estimate {error_estimate:e} \
         after {subdivisions} subdivisions"
    )]
    NoConvergence {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("root solve failed: {0}")]
    RootSolve(&'static str),

    #[error("codebook size e^({rate} * {n}) = {size:e} exceeds the limit of {limit} codewords (n = {n})")]
    CodebookTooLarge {
        rate: f64,
        n: usize,
        size: f64,
        limit: u64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}

/// Rejects anything that is not a finite, strictly positive real.
pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(name, value, "must be finite and > 0"))
    }
}

pub(crate) fn ensure_nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(invalid(name, value, "must be finite and >= 0"))
    }
}
