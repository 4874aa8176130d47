use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::invalid;
use crate::linalg::{standard_normal_vector, symmetric_rank};
use crate::random::InvGamma;
use crate::{Error, Result};

/// Posterior of an AR(p) model under the reference prior p(φ, υ) ∝ 1/υ with
/// the likelihood conditional on the first p observations.
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub p: usize,
    /// Number of modelled observations, T − p.
    pub n: usize,
    pub phi_hat_mle: DVector<f64>,
    pub rss: f64,
    /// RSS / n.
    pub v_hat_mle: f64,
    /// (F Fᵀ)⁻¹.
    pub xtx_inv: DMatrix<f64>,
    pub phi_draws: Vec<DVector<f64>>,
    pub v_draws: Vec<f64>,
}

/// Lagged design: row t holds (y_{t−1}, …, y_{t−p}) for t = p+1..T, with
/// the matching responses.
pub fn lagged_design(y: &[f64], p: usize) -> (DMatrix<f64>, DVector<f64>) {
    let n = y.len() - p;
    let x = DMatrix::from_fn(n, p, |r, c| y[p + r - 1 - c]);
    let resp = DVector::from_fn(n, |r, _| y[p + r]);
    (x, resp)
}

/// Direct Monte Carlo: υ ~ IG((n−p)/2, RSS/2), then φ | υ ~ N(φ̂, υ(FFᵀ)⁻¹).
pub fn ar_fit_direct<R: Rng + ?Sized>(
    y: &[f64],
    p: usize,
    n_draws: usize,
    rng: &mut R,
) -> Result<ArFit> {
    if p == 0 {
        return Err(invalid!("AR order must be at least 1"));
    }
    if y.len() <= 2 * p {
        return Err(invalid!("series of length {} is too short for order {p}", y.len()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(invalid!("series contains non-finite values"));
    }
    let (x, resp) = lagged_design(y, p);
    let n = resp.len();
    let xtx = x.transpose() * &x;
    let chol = match xtx.clone().cholesky() {
        Some(c) => c,
        None => {
            return Err(Error::SingularDesign {
                rank: symmetric_rank(&xtx, 1e-12),
                dim: p,
            })
        }
    };
    let phi_hat = chol.solve(&(x.transpose() * &resp));
    let resid = &resp - &x * &phi_hat;
    let rss = resid.norm_squared();
    let xtx_inv = chol.inverse();
    let mut fit = ArFit {
        p,
        n,
        phi_hat_mle: phi_hat,
        rss,
        v_hat_mle: rss / n as f64,
        xtx_inv,
        phi_draws: Vec::with_capacity(n_draws),
        v_draws: Vec::with_capacity(n_draws),
    };
    if n_draws == 0 {
        return Ok(fit);
    }
    if !(rss > 0.0) {
        return Err(invalid!(
            "residual sum of squares is zero; the series is an exact AR({p}) recursion"
        ));
    }
    let ig = InvGamma::new(0.5 * (n - p) as f64, 0.5 * rss)?;
    let cov_chol = fit
        .xtx_inv
        .clone()
        .cholesky()
        .ok_or(Error::SingularDesign { rank: p - 1, dim: p })?;
    let l = cov_chol.l();
    for _ in 0..n_draws {
        let v = ig.sample(rng);
        let z = standard_normal_vector(p, rng);
        fit.phi_draws.push(&fit.phi_hat_mle + &l * z * v.sqrt());
        fit.v_draws.push(v);
    }
    Ok(fit)
}
