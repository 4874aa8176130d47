use alloc::format;
#[allow(unused_imports)]
use num_traits::Float;

use crate::special::{expit, log1p_exp, logit};
use crate::{Error, Result};

/// Map from a constrained parameter to the real line, used so random-walk
/// proposals never leave the support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundedTransform {
    /// No constraint.
    Identity,
    /// x > lower, η = log(x − lower).
    LogLower(f64),
    /// lower < x < upper, η = logit((x − lower) / (upper − lower)).
    LogitInterval(f64, f64),
    /// x > −offset, η = log(x + offset).
    LogShifted(f64),
}

impl BoundedTransform {
    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        match *self {
            BoundedTransform::Identity => true,
            BoundedTransform::LogLower(a) => x > a,
            BoundedTransform::LogitInterval(a, b) => x > a && x < b,
            BoundedTransform::LogShifted(offset) => x + offset > 0.0,
        }
    }

    fn domain_error(&self, x: f64) -> Error {
        Error::Domain {
            value: x,
            transform: format!("{self:?}"),
        }
    }

    /// Unconstrained coordinate of `x` and the log-Jacobian of the inverse
    /// map at that coordinate, ln |dx/dη|.
    pub fn apply(&self, x: f64) -> Result<(f64, f64)> {
        if !self.contains(x) {
            return Err(self.domain_error(x));
        }
        let eta = match *self {
            BoundedTransform::Identity => x,
            BoundedTransform::LogLower(a) => (x - a).ln(),
            BoundedTransform::LogitInterval(a, b) => logit((x - a) / (b - a)),
            BoundedTransform::LogShifted(offset) => (x + offset).ln(),
        };
        Ok((eta, self.log_jacobian(eta)))
    }

    pub fn forward(&self, x: f64) -> Result<f64> {
        self.apply(x).map(|(eta, _)| eta)
    }

    pub fn inverse(&self, eta: f64) -> f64 {
        match *self {
            BoundedTransform::Identity => eta,
            BoundedTransform::LogLower(a) => a + eta.exp(),
            BoundedTransform::LogitInterval(a, b) => a + (b - a) * expit(eta),
            BoundedTransform::LogShifted(offset) => eta.exp() - offset,
        }
    }

    /// ln |dx/dη| evaluated at η.
    pub fn log_jacobian(&self, eta: f64) -> f64 {
        match *self {
            BoundedTransform::Identity => 0.0,
            BoundedTransform::LogLower(_) | BoundedTransform::LogShifted(_) => eta,
            BoundedTransform::LogitInterval(a, b) => (b - a).ln() + eta - 2.0 * log1p_exp(eta),
        }
    }
}
