//! Univariate distributions used by the Gibbs steps.
//!
//! Each parameter struct can both draw and evaluate its log density; the
//! density side is what the full-conditional tests compare against the joint
//! posterior kernel.

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDist, StandardNormal};

use crate::error::invalid;
use crate::special::{ln_gamma, ln_normal_pdf, normal_quantile, normal_sf};
use crate::Result;

#[inline]
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform draw on the open interval (0, 1).
#[inline]
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Gaussian with mean and variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    pub mean: f64,
    pub var: f64,
}

impl Normal {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.mean + self.var.sqrt() * standard_normal(rng)
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        ln_normal_pdf(x, self.mean, self.var)
    }
}

/// Gamma distribution in the shape/rate parameterization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRate {
    pub shape: f64,
    pub rate: f64,
}

impl GammaRate {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(invalid!("gamma shape must be positive and finite, got {shape}"));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(crate::Error::NonPositiveRate {
                context: "gamma",
                rate,
            });
        }
        Ok(Self { shape, rate })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // Parameters were validated on construction.
        let g = GammaDist::new(self.shape, 1.0 / self.rate).expect("validated gamma parameters");
        g.sample(rng)
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.shape * self.rate.ln() - ln_gamma(self.shape) + (self.shape - 1.0) * x.ln()
            - self.rate * x
    }
}

/// Inverse-gamma distribution: X ~ IG(shape, rate) iff 1/X ~ Gamma(shape, rate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvGamma {
    pub shape: f64,
    pub rate: f64,
}

impl InvGamma {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        GammaRate::new(shape, rate).map(|g| Self {
            shape: g.shape,
            rate: g.rate,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        1.0 / GammaRate {
            shape: self.shape,
            rate: self.rate,
        }
        .sample(rng)
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.shape * self.rate.ln() - ln_gamma(self.shape) - (self.shape + 1.0) * x.ln()
            - self.rate / x
    }

    pub fn mean(&self) -> f64 {
        if self.shape > 1.0 {
            self.rate / (self.shape - 1.0)
        } else {
            f64::INFINITY
        }
    }
}

/// Which side of the threshold a truncated normal lives on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Support (bound, +inf), bound excluded.
    Above(f64),
    /// Support (-inf, bound], bound included.
    AtMost(f64),
}

/// Standard normal truncated to (a, inf).
fn std_normal_tail<R: Rng + ?Sized>(rng: &mut R, a: f64) -> f64 {
    if a <= 5.0 {
        // Inverse CDF through the upper tail so precision does not collapse
        // when Φ(a) is close to one.
        let upper = normal_sf(a);
        loop {
            let z = -normal_quantile(open_unit(rng) * upper);
            if z > a && z.is_finite() {
                return z;
            }
        }
    } else {
        // Exponential rejection with the optimal rate for this bound.
        let alpha = 0.5 * (a + (a * a + 4.0).sqrt());
        loop {
            let z = a - open_unit(rng).ln() / alpha;
            let d = z - alpha;
            if open_unit(rng).ln() <= -0.5 * d * d {
                return z;
            }
        }
    }
}

/// Draw from N(mean, sd²) restricted to one side of a threshold.
///
/// Never loops forever: deep tails switch to exponential rejection, whose
/// acceptance rate approaches one as the bound moves out.
pub fn truncated_normal<R: Rng + ?Sized>(
    rng: &mut R,
    mean: f64,
    sd: f64,
    side: Truncation,
) -> f64 {
    match side {
        Truncation::Above(bound) => {
            let a = (bound - mean) / sd;
            let x = mean + sd * std_normal_tail(rng, a);
            if x > bound {
                x
            } else {
                // Rounding pushed the draw onto the bound; step just inside.
                bound + f64::EPSILON * bound.abs().max(f64::MIN_POSITIVE)
            }
        }
        Truncation::AtMost(bound) => {
            let a = (mean - bound) / sd;
            let x = mean - sd * std_normal_tail(rng, a);
            x.min(bound)
        }
    }
}

/// Bernoulli draw given log-odds; robust to ±inf.
#[inline]
pub fn bernoulli_log_odds<R: Rng + ?Sized>(rng: &mut R, log_odds: f64) -> bool {
    let p = crate::special::expit(log_odds);
    rng.random::<f64>() < p
}
