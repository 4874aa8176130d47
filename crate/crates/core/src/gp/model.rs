use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::invalid;
use crate::mcmc::ChainRng;
use crate::random::standard_normal;
use crate::{Error, Result};
use rand::SeedableRng;

/// Paired covariate and response observations.
#[derive(Debug, Clone, PartialEq)]
pub struct GpData {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl GpData {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(invalid!("x has {} values but y has {}", x.len(), y.len()));
        }
        if x.len() < 2 {
            return Err(invalid!("need at least 2 observations, got {}", x.len()));
        }
        if let Some(i) = x.iter().chain(&y).position(|v| !v.is_finite()) {
            return Err(invalid!("non-finite value at position {}", i % x.len()));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn y_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.y)
    }

    /// Sample mean and variance (divisor n−1) of y.
    pub fn y_moments(&self) -> (f64, f64) {
        let n = self.y.len() as f64;
        let mean = self.y.iter().sum::<f64>() / n;
        let var = self.y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }
}

/// Prior hyperparameters: σ² ~ IG(a_σ, b_σ), μ ~ N(a_μ, b_μ) with b_μ a
/// variance, τ² ~ IG(a_τ, b_τ), φ ~ U(a_φ, b_φ), and the fixed power α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpHyper {
    pub a_sigma: f64,
    pub b_sigma: f64,
    pub a_mu: f64,
    pub b_mu: f64,
    pub a_tau: f64,
    pub b_tau: f64,
    pub a_phi: f64,
    pub b_phi: f64,
    pub alpha: f64,
}

impl GpHyper {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a_sigma", self.a_sigma),
            ("b_sigma", self.b_sigma),
            ("b_mu", self.b_mu),
            ("a_tau", self.a_tau),
            ("b_tau", self.b_tau),
            ("a_phi", self.a_phi),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid!("{name} must be positive and finite, got {v}"));
            }
        }
        if !self.a_mu.is_finite() {
            return Err(invalid!("a_mu must be finite"));
        }
        if !(self.b_phi > self.a_phi && self.b_phi.is_finite()) {
            return Err(invalid!(
                "need a_phi < b_phi, got ({}, {})",
                self.a_phi,
                self.b_phi
            ));
        }
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(invalid!("alpha must lie in (0, 2], got {}", self.alpha));
        }
        Ok(())
    }
}

/// Data-driven priors: a_μ = ȳ, a_σ = a_τ = 2, b_μ = b_σ = b_τ = s²_y/3,
/// φ ~ U(0.1, 10). Marginally E(y) = ȳ and Var(y) = s²_y.
pub fn empirical_bayes(data: &GpData, alpha: f64) -> Result<GpHyper> {
    let (mean, var) = data.y_moments();
    if !(var > 0.0) {
        return Err(invalid!("response has zero sample variance"));
    }
    let third = var / 3.0;
    let hyper = GpHyper {
        a_sigma: 2.0,
        b_sigma: third,
        a_mu: mean,
        b_mu: third,
        a_tau: 2.0,
        b_tau: third,
        a_phi: 0.1,
        b_phi: 10.0,
        alpha,
    };
    hyper.validate()?;
    Ok(hyper)
}

/// C_ij = exp(−φ |x_i − x_j|^α).
pub fn power_exp_corr(x: &[f64], phi: f64, alpha: f64) -> Result<DMatrix<f64>> {
    if !(phi > 0.0 && phi.is_finite()) {
        return Err(invalid!("phi must be positive, got {phi}"));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(invalid!("alpha must lie in (0, 2], got {alpha}"));
    }
    let n = x.len();
    let mut c = DMatrix::from_element(n, n, 1.0);
    for i in 0..n {
        for j in 0..i {
            let d = (x[i] - x[j]).abs();
            let v = (-phi * d.powf(alpha)).exp();
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("power exponential covariance"));
    }
    Ok(c)
}

/// H = τ² C.
pub fn power_exp_cov(x: &[f64], tau2: f64, phi: f64, alpha: f64) -> Result<DMatrix<f64>> {
    if !(tau2 > 0.0 && tau2.is_finite()) {
        return Err(invalid!("tau2 must be positive, got {tau2}"));
    }
    Ok(power_exp_corr(x, phi, alpha)? * tau2)
}

/// f(x) = 0.3 + 0.4x + 0.5 sin(2.7x) + 1.1/(1 + x²).
pub fn true_function(x: f64) -> f64 {
    0.3 + 0.4 * x + 0.5 * libm::sin(2.7 * x) + 1.1 / (1.0 + x * x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticGp {
    pub data: GpData,
    /// f evaluated at each x.
    pub f_true: Vec<f64>,
}

/// x ~ U(−3, 3), y = f(x) + N(0, σ²).
pub fn synth_gp_data(n: usize, sigma: f64, seed: u64) -> Result<SyntheticGp> {
    if n < 2 {
        return Err(invalid!("need n >= 2, got {n}"));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(invalid!("noise sd must be non-negative, got {sigma}"));
    }
    let mut rng = ChainRng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let f_true: Vec<f64> = x.iter().map(|&v| true_function(v)).collect();
    let y = f_true
        .iter()
        .map(|&f| f + sigma * standard_normal(&mut rng))
        .collect();
    Ok(SyntheticGp {
        data: GpData::new(x, y)?,
        f_true,
    })
}
