use alloc::vec::Vec;
use alloc::format;
#[allow(unused_imports)]
use num_traits::Float;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::dlm::ar::ar_fit_direct;
use crate::dlm::filter::{backward_sample, kalman_forward};
use crate::error::invalid;
use crate::linalg::{cholesky_strict, sample_mvn_canonical};
use crate::mcmc::{ChainSpec, Trace};
use crate::random::{bernoulli_log_odds, InvGamma, Normal};
use crate::special::{ln_normal_pdf, logit};
use crate::Result;

/// Additive-outlier AR(p) model
/// y_t = γ_t α_t + x_t + ε_t, γ_t ~ Ber(π), α_t ~ N(0, A), ε_t ~ N(0, v₀),
/// x_t = φᵀ(x_{t−1}, …, x_{t−p}) + η_t, η_t ~ N(0, ω),
/// with φ_j ~ N(a_φ, b_φ) and ω ~ IG(a_ω, b_ω).
#[derive(Debug, Clone, PartialEq)]
pub struct OutlierDlmSpec {
    pub p: usize,
    pub outlier_prob: f64,
    pub obs_var_base: f64,
    pub outlier_var_add: f64,
    pub a_phi: f64,
    /// Prior variance of each φ_j.
    pub b_phi: f64,
    pub a_omega: f64,
    pub b_omega: f64,
    /// Prior on θ₀ is N(m0·1, c0·I).
    pub m0: f64,
    pub c0: f64,
}

impl OutlierDlmSpec {
    /// π = 0.2, v₀ = 0.01, A = 0.1, φ_j ~ N(0, 0.25), ω ~ IG(2, b_omega).
    pub fn with_defaults(p: usize, b_omega: f64) -> Self {
        Self {
            p,
            outlier_prob: 0.2,
            obs_var_base: 0.01,
            outlier_var_add: 0.1,
            a_phi: 0.0,
            b_phi: 0.25,
            a_omega: 2.0,
            b_omega,
            m0: 0.0,
            c0: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(invalid!("AR order must be at least 1"));
        }
        // π = 0 is allowed: it switches the outlier component off.
        if !(0.0..1.0).contains(&self.outlier_prob) {
            return Err(invalid!("outlier_prob must lie in [0, 1), got {}", self.outlier_prob));
        }
        let positive = [
            ("obs_var_base", self.obs_var_base),
            ("outlier_var_add", self.outlier_var_add),
            ("b_phi", self.b_phi),
            ("a_omega", self.a_omega),
            ("b_omega", self.b_omega),
            ("c0", self.c0),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid!("{name} must be positive and finite, got {v}"));
            }
        }
        if !self.a_phi.is_finite() || !self.m0.is_finite() {
            return Err(invalid!("a_phi and m0 must be finite"));
        }
        Ok(())
    }

    /// Observation variance of the conditional DLM once α is integrated out.
    pub fn obs_var(&self, gamma: bool) -> f64 {
        if gamma {
            self.obs_var_base + self.outlier_var_add
        } else {
            self.obs_var_base
        }
    }
}

/// Gibbs state. `theta[t]` is θ_t = (x_t, …, x_{t−p+1}) for t = 0..T.
#[derive(Debug, Clone, PartialEq)]
pub struct DlmState {
    pub gamma: Vec<bool>,
    pub alpha: Vec<f64>,
    pub theta: Vec<DVector<f64>>,
    pub phi: DVector<f64>,
    pub omega: f64,
}

/// α_t | γ_t, θ_{t,1}, y_t. With γ_t = 0 this is the prior N(0, A).
pub fn alpha_conditional(spec: &OutlierDlmSpec, x_t: f64, gamma_t: bool, y_t: f64) -> Normal {
    let g = if gamma_t { 1.0 } else { 0.0 };
    let var = 1.0 / (1.0 / spec.outlier_var_add + g / spec.obs_var_base);
    Normal {
        mean: var * g * (y_t - x_t) / spec.obs_var_base,
        var,
    }
}

pub fn sample_alpha<R: Rng + ?Sized>(
    spec: &OutlierDlmSpec,
    x_t: f64,
    gamma_t: bool,
    y_t: f64,
    rng: &mut R,
) -> f64 {
    alpha_conditional(spec, x_t, gamma_t, y_t).sample(rng)
}

/// Log-odds of γ_t = 1 given θ_{t,1} and y_t, with α_t integrated out.
pub fn gamma_log_odds(spec: &OutlierDlmSpec, x_t: f64, y_t: f64) -> f64 {
    let r = y_t - x_t;
    logit(spec.outlier_prob) + ln_normal_pdf(r, 0.0, spec.obs_var(true))
        - ln_normal_pdf(r, 0.0, spec.obs_var(false))
}

pub fn sample_gamma<R: Rng + ?Sized>(spec: &OutlierDlmSpec, x_t: f64, y_t: f64, rng: &mut R) -> bool {
    bernoulli_log_odds(rng, gamma_log_odds(spec, x_t, y_t))
}

fn check_states(theta: &[DVector<f64>], p: usize) -> Result<()> {
    if theta.len() < 2 {
        return Err(invalid!("need states θ_0..θ_T with T >= 1"));
    }
    if theta.iter().any(|s| s.len() != p) {
        return Err(invalid!("state vectors must have length {p}"));
    }
    Ok(())
}

/// φ | θ_{0:T}, ω in canonical form: returns (precision, b) with mean
/// precision⁻¹ b.
pub fn phi_conditional(
    theta: &[DVector<f64>],
    omega: f64,
    spec: &OutlierDlmSpec,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let p = spec.p;
    check_states(theta, p)?;
    let mut prec = DMatrix::identity(p, p) / spec.b_phi;
    let mut b = DVector::from_element(p, spec.a_phi / spec.b_phi);
    for t in 1..theta.len() {
        let prev = &theta[t - 1];
        prec += prev * prev.transpose() / omega;
        b += prev * (theta[t][0] / omega);
    }
    Ok((prec, b))
}

pub fn sample_phi_dlm<R: Rng + ?Sized>(
    theta: &[DVector<f64>],
    omega: f64,
    spec: &OutlierDlmSpec,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let (prec, b) = phi_conditional(theta, omega, spec)?;
    let chol = cholesky_strict(prec, "phi full conditional precision")?;
    Ok(sample_mvn_canonical(&b, &chol, rng).0)
}

/// ω | θ_{0:T}, φ ~ IG(a_ω + T/2, b_ω + ½ Σ (θ_{t,1} − φᵀθ_{t−1})²).
pub fn omega_conditional(
    theta: &[DVector<f64>],
    phi: &DVector<f64>,
    spec: &OutlierDlmSpec,
) -> Result<InvGamma> {
    check_states(theta, spec.p)?;
    let t_len = theta.len() - 1;
    let ss: f64 = (1..theta.len())
        .map(|t| {
            let r = theta[t][0] - phi.dot(&theta[t - 1]);
            r * r
        })
        .sum();
    InvGamma::new(spec.a_omega + 0.5 * t_len as f64, spec.b_omega + 0.5 * ss)
}

pub fn sample_omega<R: Rng + ?Sized>(
    theta: &[DVector<f64>],
    phi: &DVector<f64>,
    spec: &OutlierDlmSpec,
    rng: &mut R,
) -> Result<f64> {
    Ok(omega_conditional(theta, phi, spec)?.sample(rng))
}

/// Forward filter given γ, then draw θ_{0:T}. Returns the number of
/// pseudo-inverse fallbacks.
pub fn ffbs_step<R: Rng + ?Sized>(
    y: &[f64],
    state: &mut DlmState,
    spec: &OutlierDlmSpec,
    rng: &mut R,
) -> Result<usize> {
    let obs_var: Vec<f64> = state.gamma.iter().map(|&g| spec.obs_var(g)).collect();
    let m0 = DVector::from_element(spec.p, spec.m0);
    let c0 = DMatrix::identity(spec.p, spec.p) * spec.c0;
    let cache = kalman_forward(y, &obs_var, state.phi.as_slice(), state.omega, &m0, &c0)?;
    let draw = backward_sample(&cache, rng);
    state.theta = draw.states;
    Ok(draw.pinv_fallbacks)
}

/// One sweep: α, γ, φ, ω, then θ by FFBS.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    y: &[f64],
    state: &mut DlmState,
    spec: &OutlierDlmSpec,
    rng: &mut R,
) -> Result<usize> {
    for (t, &y_t) in y.iter().enumerate() {
        let x_t = state.theta[t + 1][0];
        state.alpha[t] = sample_alpha(spec, x_t, state.gamma[t], y_t, rng);
    }
    for (t, &y_t) in y.iter().enumerate() {
        let x_t = state.theta[t + 1][0];
        state.gamma[t] = sample_gamma(spec, x_t, y_t, rng);
    }
    state.phi = sample_phi_dlm(&state.theta, state.omega, spec, rng)?;
    state.omega = sample_omega(&state.theta, &state.phi, spec, rng)?;
    ffbs_step(y, state, spec, rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierDlmFit {
    pub phi: Vec<Trace>,
    pub omega: Trace,
    /// Posterior Pr(γ_t = 1 | y), t = 1..T.
    pub prob_outlier: Vec<f64>,
    pub alpha_mean: Vec<f64>,
    pub x_mean: Vec<f64>,
    /// Posterior mean of γ_t α_t + x_t.
    pub fitted_mean: Vec<f64>,
    pub pinv_fallbacks: usize,
}

impl OutlierDlmFit {
    /// 1-based times with Pr(γ_t = 1 | y) above `threshold`.
    pub fn flagged(&self, threshold: f64) -> Vec<usize> {
        self.prob_outlier
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > threshold)
            .map(|(i, _)| i + 1)
            .collect()
    }
}

/// Starting point: no outliers, φ and ω at their least-squares values,
/// θ from one FFBS pass.
pub fn initial_state<R: Rng + ?Sized>(
    y: &[f64],
    spec: &OutlierDlmSpec,
    rng: &mut R,
) -> Result<DlmState> {
    let ar = ar_fit_direct(y, spec.p, 0, rng)?;
    let t_len = y.len();
    let mut state = DlmState {
        gamma: alloc::vec![false; t_len],
        alpha: alloc::vec![0.0; t_len],
        theta: Vec::new(),
        phi: ar.phi_hat_mle,
        omega: if ar.v_hat_mle > 0.0 { ar.v_hat_mle } else { spec.b_omega },
    };
    ffbs_step(y, &mut state, spec, rng)?;
    Ok(state)
}

pub fn fit_outlier_dlm(y: &[f64], spec: &OutlierDlmSpec, chain: &ChainSpec) -> Result<OutlierDlmFit> {
    spec.validate()?;
    chain.validate()?;
    if y.len() < 10 {
        return Err(invalid!("series needs at least 10 observations, got {}", y.len()));
    }
    let mut rng = chain.rng();
    let mut state = initial_state(y, spec, &mut rng)?;
    let t_len = y.len();
    let kept = chain.retained();
    let mut fit = OutlierDlmFit {
        phi: (1..=spec.p)
            .map(|j| Trace::with_capacity(format!("phi{j}"), kept))
            .collect(),
        omega: Trace::with_capacity("omega", kept),
        prob_outlier: alloc::vec![0.0; t_len],
        alpha_mean: alloc::vec![0.0; t_len],
        x_mean: alloc::vec![0.0; t_len],
        fitted_mean: alloc::vec![0.0; t_len],
        pinv_fallbacks: 0,
    };
    for iter in 1..=chain.total_iterations {
        // α is drawn against the γ and θ of the previous sweep, so that triple
        // is a joint posterior draw; capture the fitted value before they move.
        let before_gamma = state.gamma.clone();
        let before_x: Vec<f64> = state.theta[1..].iter().map(|s| s[0]).collect();
        fit.pinv_fallbacks += gibbs_sweep(y, &mut state, spec, &mut rng)?;
        if !chain.is_retained(iter) {
            continue;
        }
        for (trace, &v) in fit.phi.iter_mut().zip(state.phi.iter()) {
            trace.push(v);
        }
        fit.omega.push(state.omega);
        for t in 0..t_len {
            let g = if before_gamma[t] { 1.0 } else { 0.0 };
            fit.fitted_mean[t] += g * state.alpha[t] + before_x[t];
            fit.alpha_mean[t] += state.alpha[t];
            if state.gamma[t] {
                fit.prob_outlier[t] += 1.0;
            }
            fit.x_mean[t] += state.theta[t + 1][0];
        }
    }
    let k = kept as f64;
    for v in fit
        .prob_outlier
        .iter_mut()
        .chain(fit.alpha_mean.iter_mut())
        .chain(fit.x_mean.iter_mut())
        .chain(fit.fitted_mean.iter_mut())
    {
        *v /= k;
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> OutlierDlmSpec {
        OutlierDlmSpec::with_defaults(1, 0.01)
    }

    #[test]
    fn alpha_prior_when_no_outlier() {
        let c = alpha_conditional(&spec(), 0.3, false, 5.0);
        assert_eq!(c.mean, 0.0);
        assert!((c.var - 0.1).abs() < 1e-15);
    }

    #[test]
    fn alpha_with_outlier() {
        let c = alpha_conditional(&spec(), 0.5, true, 1.5);
        assert!((c.var - 1.0 / 110.0).abs() < 1e-15);
        assert!((c.mean - 100.0 / 110.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_odds_at_zero_residual() {
        let lo = gamma_log_odds(&spec(), 1.0, 1.0);
        let odds = 1.0 / (4.0 * 11f64.sqrt());
        assert!((lo.exp() - odds).abs() < 1e-12);
        let p = crate::special::expit(lo);
        assert!((p - 0.07009).abs() < 1e-5);
        assert!(crate::special::expit(gamma_log_odds(&spec(), 0.0, 1.0)) > 0.999);
    }
}
