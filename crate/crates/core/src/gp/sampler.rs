use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::model::{power_exp_corr, GpData, GpHyper};
use crate::error::invalid;
use crate::linalg::{cholesky_jittered, cholesky_strict, standard_normal_vector, Chol};
use crate::mcmc::{quantile_sorted, Adaptation, BoundedTransform, ChainSpec, RwmKernel, Trace};
use crate::random::{InvGamma, Normal};
use crate::{Error, Result};

/// Current values of (θ, σ², μ, τ², φ).
#[derive(Debug, Clone, PartialEq)]
pub struct GpState {
    pub theta: DVector<f64>,
    pub sigma2: f64,
    pub mu: f64,
    pub tau2: f64,
    pub phi: f64,
}

impl GpState {
    /// θ = y, μ = ȳ, σ² = τ² = s²_y/2, φ = 1 (or the middle of the φ range
    /// when 1 lies outside it).
    pub fn initial(data: &GpData, hyper: &GpHyper) -> Self {
        let (mean, var) = data.y_moments();
        let phi = if hyper.a_phi < 1.0 && 1.0 < hyper.b_phi {
            1.0
        } else {
            0.5 * (hyper.a_phi + hyper.b_phi)
        };
        Self {
            theta: data.y_vector(),
            sigma2: 0.5 * var,
            mu: mean,
            tau2: 0.5 * var,
            phi,
        }
    }

    fn centered(&self) -> DVector<f64> {
        self.theta.add_scalar(-self.mu)
    }
}

/// Cholesky factor of the correlation matrix C(φ) plus the pieces every
/// Gibbs step reuses. Any jitter needed is folded into `corr`.
#[derive(Debug, Clone)]
pub struct CorrFactor {
    pub phi: f64,
    pub corr: DMatrix<f64>,
    pub jitter: f64,
    chol: Chol,
    log_det: f64,
    cinv_one: DVector<f64>,
    one_cinv_one: f64,
}

impl CorrFactor {
    pub fn new(x: &[f64], phi: f64, alpha: f64) -> Result<Self> {
        let mut corr = power_exp_corr(x, phi, alpha)?;
        let f = cholesky_jittered(&corr, 1.0, "GP correlation matrix")?;
        for i in 0..corr.nrows() {
            corr[(i, i)] += f.jitter;
        }
        let log_det = f.log_det();
        let cinv_one = f.chol.solve(&DVector::from_element(x.len(), 1.0));
        let one_cinv_one = cinv_one.sum();
        Ok(Self {
            phi,
            corr,
            jitter: f.jitter,
            chol: f.chol,
            log_det,
            cinv_one,
            one_cinv_one,
        })
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// vᵀ C⁻¹ v.
    pub fn quad(&self, v: &DVector<f64>) -> f64 {
        let w = self
            .chol
            .l_dirty()
            .solve_lower_triangular(v)
            .expect("Cholesky factor has a positive diagonal");
        w.norm_squared()
    }
}

/// Full conditional of θ as (mean, covariance). The sampler itself never
/// forms this covariance; the function exists for checking.
pub fn theta_conditional(
    state: &GpState,
    data: &GpData,
    factor: &CorrFactor,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let h = &factor.corr * state.tau2;
    let s_chol = noisy_cov_chol(&h, state.sigma2)?;
    let y = data.y_vector();
    let mean = h.clone() * s_chol.solve(&y.add_scalar(-state.mu)) + DVector::from_element(y.len(), state.mu);
    let cov = &h - &h * s_chol.solve(&h);
    Ok((mean, cov))
}

fn noisy_cov_chol(h: &DMatrix<f64>, sigma2: f64) -> Result<Chol> {
    let mut s = h.clone();
    for i in 0..s.nrows() {
        s[(i, i)] += sigma2;
    }
    cholesky_strict(s, "H + sigma2 I")
}

/// Step 1. Draws θ ~ N(m_θ, V_θ) by perturbing a prior draw:
/// θ = θ₀ + H (H + σ²I)⁻¹ (y − θ₀ − ε) with θ₀ ~ N(μ1, H), ε ~ N(0, σ²I).
/// Only H + σ²I is factored, and H is never inverted.
pub fn gibbs_step_theta<R: Rng + ?Sized>(
    state: &mut GpState,
    data: &GpData,
    factor: &CorrFactor,
    rng: &mut R,
) -> Result<()> {
    let n = data.len();
    let h = &factor.corr * state.tau2;
    let s_chol = noisy_cov_chol(&h, state.sigma2)?;
    let z1 = standard_normal_vector(n, rng);
    let z2 = standard_normal_vector(n, rng);
    let prior = (factor.chol.l_dirty().lower_triangle() * z1) * state.tau2.sqrt();
    let prior = prior.add_scalar(state.mu);
    let resid = data.y_vector() - &prior - z2 * state.sigma2.sqrt();
    let theta = prior + h * s_chol.solve(&resid);
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("theta update"));
    }
    state.theta = theta;
    Ok(())
}

pub fn sigma2_conditional(state: &GpState, data: &GpData, hyper: &GpHyper) -> Result<InvGamma> {
    let ss: f64 = data
        .y()
        .iter()
        .zip(state.theta.iter())
        .map(|(y, t)| (y - t) * (y - t))
        .sum();
    InvGamma::new(hyper.a_sigma + 0.5 * data.len() as f64, hyper.b_sigma + 0.5 * ss)
}

pub fn mu_conditional(state: &GpState, hyper: &GpHyper, factor: &CorrFactor) -> Normal {
    let prec = 1.0 / hyper.b_mu + factor.one_cinv_one / state.tau2;
    let var = 1.0 / prec;
    let lin = hyper.a_mu / hyper.b_mu + factor.cinv_one.dot(&state.theta) / state.tau2;
    Normal {
        mean: var * lin,
        var,
    }
}

pub fn tau2_conditional(state: &GpState, hyper: &GpHyper, factor: &CorrFactor) -> Result<InvGamma> {
    let q = factor.quad(&state.centered());
    InvGamma::new(
        hyper.a_tau + 0.5 * state.theta.len() as f64,
        hyper.b_tau + 0.5 * q,
    )
}

/// Step 2.
pub fn gibbs_step_sigma2<R: Rng + ?Sized>(
    state: &mut GpState,
    data: &GpData,
    hyper: &GpHyper,
    rng: &mut R,
) -> Result<()> {
    state.sigma2 = sigma2_conditional(state, data, hyper)?.sample(rng);
    Ok(())
}

/// Step 3.
pub fn gibbs_step_mu<R: Rng + ?Sized>(
    state: &mut GpState,
    hyper: &GpHyper,
    factor: &CorrFactor,
    rng: &mut R,
) {
    state.mu = mu_conditional(state, hyper, factor).sample(rng);
}

/// Step 4.
pub fn gibbs_step_tau2<R: Rng + ?Sized>(
    state: &mut GpState,
    hyper: &GpHyper,
    factor: &CorrFactor,
    rng: &mut R,
) -> Result<()> {
    state.tau2 = tau2_conditional(state, hyper, factor)?.sample(rng);
    Ok(())
}

/// ½(log|H⁻¹| − (θ−μ1)ᵀH⁻¹(θ−μ1)) at the φ of `factor`; the uniform prior
/// on φ contributes nothing.
pub fn phi_log_target(state: &GpState, factor: &CorrFactor) -> f64 {
    let n = state.theta.len() as f64;
    -0.5 * (n * state.tau2.ln() + factor.log_det() + factor.quad(&state.centered()) / state.tau2)
}

/// Step 5. Metropolis on η = logit((φ − a_φ)/(b_φ − a_φ)). A proposal whose
/// correlation matrix cannot be factored is rejected. On acceptance the
/// factor is replaced by the proposal's.
pub fn metropolis_step_phi<R: Rng + ?Sized>(
    state: &mut GpState,
    data: &GpData,
    hyper: &GpHyper,
    factor: &mut CorrFactor,
    kernel: &mut RwmKernel,
    rng: &mut R,
) -> Result<bool> {
    let current = phi_log_target(state, factor);
    let mut proposed: Option<CorrFactor> = None;
    let step = kernel.update_cached(
        state.phi,
        current,
        |phi| match CorrFactor::new(data.x(), phi, hyper.alpha) {
            Ok(f) => {
                let lp = phi_log_target(state, &f);
                proposed = Some(f);
                lp
            }
            Err(e) => {
                log::debug!("phi proposal {phi} rejected: {e}");
                f64::NEG_INFINITY
            }
        },
        rng,
    )?;
    if step.accepted {
        *factor = proposed.expect("accepted proposal was factorized");
        state.phi = step.value;
    }
    Ok(step.accepted)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpOptions {
    /// Proposal sd δ for η.
    pub step: f64,
    pub adapt: bool,
}

impl Default for GpOptions {
    fn default() -> Self {
        Self {
            step: 1.0,
            adapt: true,
        }
    }
}

/// Pointwise posterior summary of f at one observed x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub x: f64,
    pub f_mean: f64,
    pub f_q025: f64,
    pub f_q975: f64,
}

#[derive(Debug, Clone)]
pub struct GpFit {
    /// One trace per observation, in input order.
    pub theta: Vec<Trace>,
    pub sigma2: Trace,
    pub mu: Trace,
    pub tau2: Trace,
    pub phi: Trace,
    /// Sorted by x.
    pub band: Vec<BandPoint>,
    pub acceptance_phi: f64,
    pub final_step: f64,
    /// Largest diagonal jitter any accepted correlation matrix needed.
    pub max_jitter: f64,
}

/// Runs steps 1–5 in order each iteration.
pub fn fit_gp(
    data: &GpData,
    hyper: &GpHyper,
    spec: &ChainSpec,
    options: GpOptions,
) -> Result<GpFit> {
    hyper.validate()?;
    spec.validate()?;
    let state = GpState::initial(data, hyper);
    fit_gp_from(data, hyper, spec, options, state)
}

pub fn fit_gp_from(
    data: &GpData,
    hyper: &GpHyper,
    spec: &ChainSpec,
    options: GpOptions,
    mut state: GpState,
) -> Result<GpFit> {
    if state.theta.len() != data.len() {
        return Err(invalid!("initial theta has the wrong length"));
    }
    if !(state.phi > hyper.a_phi && state.phi < hyper.b_phi) {
        return Err(invalid!("initial phi {} outside ({}, {})", state.phi, hyper.a_phi, hyper.b_phi));
    }
    let mut rng = spec.rng();
    let mut kernel = RwmKernel::new(
        BoundedTransform::LogitInterval(hyper.a_phi, hyper.b_phi),
        options.step,
    )?;
    if options.adapt && spec.burn_in > 0 {
        kernel = kernel.with_adaptation(Adaptation::default());
    }
    let mut factor = CorrFactor::new(data.x(), state.phi, hyper.alpha)?;
    let mut max_jitter = factor.jitter;

    let n = data.len();
    let cap = spec.retained();
    let mut theta_tr: Vec<Trace> = (0..n)
        .map(|i| Trace::with_capacity(format!("theta[{}]", i + 1), cap))
        .collect();
    let mut sigma2 = Trace::with_capacity("sigma2", cap);
    let mut mu = Trace::with_capacity("mu", cap);
    let mut tau2 = Trace::with_capacity("tau2", cap);
    let mut phi = Trace::with_capacity("phi", cap);

    for it in 1..=spec.total_iterations {
        gibbs_step_theta(&mut state, data, &factor, &mut rng)?;
        gibbs_step_sigma2(&mut state, data, hyper, &mut rng)?;
        gibbs_step_mu(&mut state, hyper, &factor, &mut rng);
        gibbs_step_tau2(&mut state, hyper, &factor, &mut rng)?;
        if metropolis_step_phi(&mut state, data, hyper, &mut factor, &mut kernel, &mut rng)? {
            max_jitter = max_jitter.max(factor.jitter);
        }
        if it == spec.burn_in {
            kernel.stop_adaptation();
            kernel.reset_counters();
        }
        if spec.is_retained(it) {
            for (tr, &v) in theta_tr.iter_mut().zip(state.theta.iter()) {
                tr.push(v);
            }
            sigma2.push(state.sigma2);
            mu.push(state.mu);
            tau2.push(state.tau2);
            phi.push(state.phi);
        }
    }

    let band = posterior_band(data.x(), &theta_tr);
    Ok(GpFit {
        theta: theta_tr,
        sigma2,
        mu,
        tau2,
        phi,
        band,
        acceptance_phi: kernel.acceptance_rate(),
        final_step: kernel.step_size,
        max_jitter,
    })
}

/// Pointwise mean and 95% quantile band, ordered by x.
pub fn posterior_band(x: &[f64], theta: &[Trace]) -> Vec<BandPoint> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    order
        .into_iter()
        .map(|i| {
            let mut d = theta[i].draws().to_vec();
            d.sort_by(|a, b| a.total_cmp(b));
            BandPoint {
                x: x[i],
                f_mean: theta[i].mean(),
                f_q025: quantile_sorted(&d, 0.025),
                f_q975: quantile_sorted(&d, 0.975),
            }
        })
        .collect()
}
