//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use bayescase_core::special::{ln_gamma, LN_2PI};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub mod grid;

/// Block sizes of every set partition of {1..n}, via restricted growth
/// strings.
pub fn set_partitions(n: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut a = vec![0usize; n];
    fn rec(i: usize, max: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<u64>>) {
        let n = a.len();
        if i == n {
            let blocks = a.iter().max().map_or(0, |m| m + 1);
            let mut sizes = vec![0u64; blocks];
            for &b in a.iter() {
                sizes[b] += 1;
            }
            out.push(sizes);
            return;
        }
        for b in 0..=max + 1 {
            a[i] = b;
            rec(i + 1, max.max(b), a, out);
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    a[0] = 0;
    rec(1, 0, &mut a, &mut out);
    out
}

/// Ordered compositions of n into positive parts.
pub fn compositions(n: u64) -> Vec<Vec<u64>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Number of distinct values after n sequential draws from the
/// two-parameter urn.
pub fn simulate_k<R: Rng>(n: u64, theta: f64, sigma: f64, rng: &mut R) -> u64 {
    let mut k = 0u64;
    for i in 0..n {
        let p_new = if i == 0 {
            1.0
        } else {
            (theta + sigma * k as f64) / (theta + i as f64)
        };
        if rng.random::<f64>() < p_new {
            k += 1;
        }
    }
    k
}

pub fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

pub fn ln_normal(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (LN_2PI + var.ln() + (x - mean) * (x - mean) / var)
}

/// Inverse-gamma log density, shape a and scale b.
pub fn ln_inv_gamma(x: f64, a: f64, b: f64) -> f64 {
    a * b.ln() - ln_gamma(a) - (a + 1.0) * x.ln() - b / x
}

/// Gamma log density, shape a and rate b.
pub fn ln_gamma_pdf(x: f64, a: f64, b: f64) -> f64 {
    a * b.ln() - ln_gamma(a) + (a - 1.0) * x.ln() - b * x
}

pub fn ln_mvn(x: &DVector<f64>, mean: &DVector<f64>, cov: &DMatrix<f64>) -> f64 {
    let n = x.len() as f64;
    let chol = cov.clone().cholesky().expect("covariance is positive definite");
    let d = x - mean;
    let w = chol.l().solve_lower_triangular(&d).unwrap();
    let log_det: f64 = chol.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
    -0.5 * (n * LN_2PI + log_det + w.norm_squared())
}

/// Gaussian log density given the precision matrix.
pub fn ln_mvn_precision(x: &DVector<f64>, mean: &DVector<f64>, prec: &DMatrix<f64>) -> f64 {
    let cov = prec.clone().try_inverse().unwrap();
    ln_mvn(x, mean, &cov)
}

/// Compares log p(a) − log p(b) from a full conditional with the same
/// difference of the joint kernel.
pub fn assert_grid_ratio(label: &str, cond: (f64, f64), joint: (f64, f64), tol: f64) {
    let lhs = cond.0 - cond.1;
    let rhs = joint.0 - joint.1;
    assert!(
        (lhs - rhs).abs() < tol,
        "{label}: conditional ratio {lhs} vs joint ratio {rhs}"
    );
}

/// Linear map from (θ₀, η₁..η_T) to x_{1..T} for the AR(p) state equation
/// with θ₀ = (x₀, x₋₁, …, x₋ₚ₊₁).
pub fn ar_state_map(phi: &[f64], t_len: usize) -> DMatrix<f64> {
    let p = phi.len();
    let dim = p + t_len;
    let mut m = DMatrix::zeros(t_len, dim);
    for k in 0..dim {
        // history[j] = x_{j−p+1}, j = 0..p−1 initial, then x_1..x_T
        let mut hist = vec![0.0; p + t_len];
        if k < p {
            hist[p - 1 - k] = 1.0;
        }
        for t in 0..t_len {
            let mut v = if k >= p && k - p == t { 1.0 } else { 0.0 };
            for (j, c) in phi.iter().enumerate() {
                v += c * hist[p - 1 + t - j];
            }
            hist[p + t] = v;
            m[(t, k)] = v;
        }
    }
    m
}

/// Dense Gaussian posterior of the full path (x_{−p+1}, …, x_T) and the
/// marginal log likelihood of y for the conditionally Gaussian DLM.
pub struct DenseDlm {
    /// Prior mean and covariance of (θ₀ coordinates, x_1..x_T).
    pub prior_mean: DVector<f64>,
    pub prior_cov: DMatrix<f64>,
    pub post_mean: DVector<f64>,
    pub post_cov: DMatrix<f64>,
    pub log_likelihood: f64,
}

pub fn dense_dlm(
    y: &[f64],
    obs_var: &[f64],
    phi: &[f64],
    omega: f64,
    m0: &DVector<f64>,
    c0: &DMatrix<f64>,
) -> DenseDlm {
    let p = phi.len();
    let t_len = y.len();
    let dim = p + t_len;
    let xmap = ar_state_map(phi, t_len);
    // Full map from innovations to (θ₀, x_{1..T}).
    let mut full = DMatrix::zeros(dim, dim);
    for k in 0..p {
        full[(k, k)] = 1.0;
    }
    full.view_mut((p, 0), (t_len, dim)).copy_from(&xmap);
    let mut d = DMatrix::zeros(dim, dim);
    d.view_mut((0, 0), (p, p)).copy_from(c0);
    for t in 0..t_len {
        d[(p + t, p + t)] = omega;
    }
    let mut e_mean = DVector::zeros(dim);
    e_mean.rows_mut(0, p).copy_from(m0);
    let prior_mean = &full * e_mean;
    let prior_cov = &full * d * full.transpose();
    let mut h = DMatrix::zeros(t_len, dim);
    for t in 0..t_len {
        h[(t, p + t)] = 1.0;
    }
    let s = &h * &prior_cov * h.transpose() + DMatrix::from_diagonal(&DVector::from_column_slice(obs_var));
    let s_inv = s.clone().try_inverse().unwrap();
    let yv = DVector::from_column_slice(y);
    let gain = &prior_cov * h.transpose() * &s_inv;
    let post_mean = &prior_mean + &gain * (&yv - &h * &prior_mean);
    let post_cov = &prior_cov - &gain * &h * &prior_cov;
    let log_likelihood = ln_mvn(&yv, &(&h * &prior_mean), &s);
    DenseDlm {
        prior_mean,
        prior_cov,
        post_mean,
        post_cov,
        log_likelihood,
    }
}

/// Dense power exponential correlation, C_ij = exp(−φ|x_i − x_j|^α).
pub fn dense_corr(x: &[f64], phi: f64, alpha: f64) -> DMatrix<f64> {
    DMatrix::from_fn(x.len(), x.len(), |i, j| (-phi * (x[i] - x[j]).abs().powf(alpha)).exp())
}

/// Log joint posterior kernel of the GP regression model.
pub fn gp_log_joint(
    x: &[f64],
    y: &[f64],
    h: &bayescase_core::gp::GpHyper,
    s: &bayescase_core::gp::GpState,
) -> f64 {
    if !(h.a_phi < s.phi && s.phi < h.b_phi) {
        return f64::NEG_INFINITY;
    }
    let n = x.len();
    let lik: f64 = (0..n).map(|i| ln_normal(y[i], s.theta[i], s.sigma2)).sum();
    let cov = dense_corr(x, s.phi, h.alpha) * s.tau2;
    let prior_theta = ln_mvn(&s.theta, &DVector::from_element(n, s.mu), &cov);
    lik + prior_theta
        + ln_inv_gamma(s.sigma2, h.a_sigma, h.b_sigma)
        + ln_normal(s.mu, h.a_mu, h.b_mu)
        + ln_inv_gamma(s.tau2, h.a_tau, h.b_tau)
        - (h.b_phi - h.a_phi).ln()
}

/// Log joint kernel of the outlier DLM with α present, or with α
/// integrated out when `alpha` is `None`.
#[allow(clippy::too_many_arguments)]
pub fn dlm_log_joint(
    y: &[f64],
    spec: &bayescase_core::dlm::OutlierDlmSpec,
    gamma: &[bool],
    alpha: Option<&[f64]>,
    theta: &[DVector<f64>],
    phi: &DVector<f64>,
    omega: f64,
) -> f64 {
    let p = spec.p;
    let mut lp = 0.0;
    for t in 0..y.len() {
        let x_t = theta[t + 1][0];
        let g = gamma[t];
        lp += if g { spec.outlier_prob.ln() } else { (1.0 - spec.outlier_prob).ln() };
        match alpha {
            Some(a) => {
                let shift = if g { a[t] } else { 0.0 };
                lp += ln_normal(y[t], x_t + shift, spec.obs_var_base)
                    + ln_normal(a[t], 0.0, spec.outlier_var_add);
            }
            None => {
                let v = spec.obs_var_base + if g { spec.outlier_var_add } else { 0.0 };
                lp += ln_normal(y[t], x_t, v);
            }
        }
        let pred: f64 = (0..p).map(|j| phi[j] * theta[t][j]).sum();
        lp += ln_normal(x_t, pred, omega);
    }
    for j in 0..p {
        lp += ln_normal(theta[0][j], spec.m0, spec.c0);
        lp += ln_normal(phi[j], spec.a_phi, spec.b_phi);
    }
    lp + ln_inv_gamma(omega, spec.a_omega, spec.b_omega)
}

/// Log joint kernel of the spatial probit-t model. The intrinsic CAR
/// factors use λ^{rank/2} and (σ₀⁻²)^{rank*/2} normalizers.
pub fn spatial_log_joint(
    data: &bayescase_core::spatial::PanelData,
    lat: &bayescase_core::spatial::Lattice,
    h: &bayescase_core::spatial::SpatialHyper,
    s: &bayescase_core::spatial::SpatialState,
) -> f64 {
    let (n, t_len) = (data.n_units(), data.n_times());
    let w = &lat.units.w;
    let mut lp = 0.0;
    for t in 0..t_len {
        let tv = data.times()[t];
        for i in 0..n {
            let omega = s.omega[(i, t)];
            if (omega > 0.0) != data.y(i, t) {
                return f64::NEG_INFINITY;
            }
            let mut eta = s.xi * tv + s.theta[(i, t)] + s.phi[(i, t)];
            for k in 0..data.n_covariates() {
                eta += data.x()[(i, k)] * s.beta[k];
            }
            if lat.n_regions > 0 {
                eta += s.gamma[lat.region[i]];
            }
            lp += ln_normal(omega, eta, 1.0 / s.kappa[t]);
            lp += ln_normal(s.theta[(i, t)], 0.0, 1.0 / s.tau[t]);
        }
        let phi_t = s.phi.column(t).into_owned();
        let quad = (phi_t.transpose() * w * &phi_t)[(0, 0)];
        lp += 0.5 * lat.units.rank as f64 * s.lambda[t].ln() - 0.5 * s.lambda[t] * quad;
        lp += ln_gamma_pdf(s.kappa[t], 0.5 * h.nu_0, 0.5 * h.nu_0);
        lp += ln_gamma_pdf(s.tau[t], h.a_tau, h.b_tau);
        lp += ln_gamma_pdf(s.lambda[t], h.a_lambda, h.b_lambda);
    }
    for k in 0..s.beta.len() {
        lp += ln_normal(s.beta[k], 0.0, h.sigma2_0);
    }
    if lat.n_regions > 0 {
        let g = &s.gamma;
        lp -= 0.5 * (g.transpose() * &lat.w_star * g)[(0, 0)] / h.sigma2_0;
    }
    lp + ln_normal(s.xi, 0.0, h.sigma2_0)
}
