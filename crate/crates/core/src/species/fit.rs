#[allow(unused_imports)]
use num_traits::Float;

use super::partition::{expected_k_crp, log_eppf, PartitionParams};
use super::AbundanceData;
use crate::error::invalid;
use crate::mcmc::{Adaptation, BoundedTransform, ChainSpec, RwmKernel, Trace};
use crate::random::GammaRate;
use crate::special::{ln_beta, ln_normal_pdf, ln_normal_sf};
use crate::Result;

/// Gamma(shape, rate) prior on the CRP strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrpPrior {
    pub a_theta: f64,
    pub b_theta: f64,
}

impl Default for CrpPrior {
    fn default() -> Self {
        Self {
            a_theta: 1.0,
            b_theta: 1.0,
        }
    }
}

/// Beta(a_sigma, b_sigma) on the discount and a normal with mean `a_theta`
/// and standard deviation `b_theta`, truncated to (−σ, ∞), on the strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PypPrior {
    pub a_sigma: f64,
    pub b_sigma: f64,
    pub a_theta: f64,
    pub b_theta: f64,
}

impl Default for PypPrior {
    fn default() -> Self {
        Self {
            a_sigma: 1.0,
            b_sigma: 1.0,
            a_theta: 723.0,
            b_theta: 100.0,
        }
    }
}

/// Proposal scale on the transformed line and whether it adapts during
/// burn-in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuning {
    pub step: f64,
    pub adapt: bool,
}

impl Tuning {
    pub fn fixed(step: f64) -> Self {
        Self { step, adapt: false }
    }
}

#[derive(Debug, Clone)]
pub struct CrpFit {
    pub theta: Trace,
    /// Post-burn-in acceptance rate.
    pub acceptance: f64,
    pub final_step: f64,
}

#[derive(Debug, Clone)]
pub struct PypFit {
    pub sigma: Trace,
    pub theta: Trace,
    pub acceptance_sigma: f64,
    pub acceptance_theta: f64,
}

pub fn crp_log_posterior(data: &AbundanceData, prior: &CrpPrior, theta: f64) -> f64 {
    if !(theta > 0.0) || !theta.is_finite() {
        return f64::NEG_INFINITY;
    }
    let g = GammaRate {
        shape: prior.a_theta,
        rate: prior.b_theta,
    };
    log_eppf(data.sizes(), PartitionParams { theta, sigma: 0.0 }) + g.ln_pdf(theta)
}

pub fn pyp_log_posterior(data: &AbundanceData, prior: &PypPrior, theta: f64, sigma: f64) -> f64 {
    if !(sigma > 0.0 && sigma < 1.0) || !(theta + sigma > 0.0) || !theta.is_finite() {
        return f64::NEG_INFINITY;
    }
    let ln_sigma_prior = (prior.a_sigma - 1.0) * sigma.ln()
        + (prior.b_sigma - 1.0) * (1.0 - sigma).ln()
        - ln_beta(prior.a_sigma, prior.b_sigma);
    // The truncation point moves with σ, so its normalizer stays in.
    let sd = prior.b_theta;
    let ln_theta_prior = ln_normal_pdf(theta, prior.a_theta, sd * sd)
        - ln_normal_sf((-sigma - prior.a_theta) / sd);
    log_eppf(data.sizes(), PartitionParams { theta, sigma }) + ln_sigma_prior + ln_theta_prior
}

fn validate_data(data: &AbundanceData) -> Result<()> {
    if data.n() < 2 {
        return Err(invalid!("need at least two observations, got {}", data.n()));
    }
    Ok(())
}

/// θ solving E[K^n | θ] = K, clamped to [1e-3, 1e7].
pub fn crp_moment_start(data: &AbundanceData) -> f64 {
    let (n, k) = (data.n(), data.k() as f64);
    let (mut lo, mut hi) = (1e-3f64.ln(), 1e7f64.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expected_k_crp(n, mid.exp()) < k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

fn kernel(transform: BoundedTransform, tuning: Tuning, spec: &ChainSpec) -> Result<RwmKernel> {
    let k = RwmKernel::new(transform, tuning.step)?;
    Ok(if tuning.adapt && spec.burn_in > 0 {
        k.with_adaptation(Adaptation::default())
    } else {
        k
    })
}

/// Random-walk Metropolis on η = log θ.
pub fn fit_crp(
    data: &AbundanceData,
    prior: &CrpPrior,
    spec: &ChainSpec,
    tuning: Tuning,
) -> Result<CrpFit> {
    validate_data(data)?;
    GammaRate::new(prior.a_theta, prior.b_theta)?;
    spec.validate()?;
    let mut rng = spec.rng();
    let mut k = kernel(BoundedTransform::LogLower(0.0), tuning, spec)?;
    let target = |t: f64| crp_log_posterior(data, prior, t);
    let mut theta = crp_moment_start(data);
    let mut lp = target(theta);
    let mut trace = Trace::with_capacity("theta", spec.retained());
    for it in 1..=spec.total_iterations {
        let step = k.update_cached(theta, lp, target, &mut rng)?;
        theta = step.value;
        lp = step.log_target;
        if it == spec.burn_in {
            k.stop_adaptation();
            k.reset_counters();
        }
        if spec.is_retained(it) {
            trace.push(theta);
        }
    }
    Ok(CrpFit {
        theta: trace,
        acceptance: k.acceptance_rate(),
        final_step: k.step_size,
    })
}

/// Two-block Metropolis: σ on the logit scale, then θ on ψ = log(θ + σ).
pub fn fit_pyp(
    data: &AbundanceData,
    prior: &PypPrior,
    spec: &ChainSpec,
    sigma_tuning: Tuning,
    theta_tuning: Tuning,
) -> Result<PypFit> {
    validate_data(data)?;
    if !(prior.a_sigma > 0.0 && prior.b_sigma > 0.0) {
        return Err(invalid!("Beta prior on sigma needs positive parameters"));
    }
    if !(prior.b_theta > 0.0) || !prior.a_theta.is_finite() {
        return Err(invalid!(
            "normal prior on theta needs a finite mean and positive sd"
        ));
    }
    spec.validate()?;
    let mut rng = spec.rng();
    let mut ks = kernel(BoundedTransform::LogitInterval(0.0, 1.0), sigma_tuning, spec)?;
    let mut kt = kernel(BoundedTransform::LogShifted(0.5), theta_tuning, spec)?;

    let mut sigma = 0.5;
    let mut theta = if prior.a_theta > 0.0 {
        prior.a_theta
    } else {
        1.0
    };
    let mut lp = pyp_log_posterior(data, prior, theta, sigma);
    let mut trace_s = Trace::with_capacity("sigma", spec.retained());
    let mut trace_t = Trace::with_capacity("theta", spec.retained());
    for it in 1..=spec.total_iterations {
        let th = theta;
        let s = ks.update_cached(sigma, lp, |v| pyp_log_posterior(data, prior, th, v), &mut rng)?;
        sigma = s.value;
        lp = s.log_target;

        kt.transform = BoundedTransform::LogShifted(sigma);
        let sg = sigma;
        let t = kt.update_cached(theta, lp, |v| pyp_log_posterior(data, prior, v, sg), &mut rng)?;
        theta = t.value;
        lp = t.log_target;

        if it == spec.burn_in {
            ks.stop_adaptation();
            kt.stop_adaptation();
            ks.reset_counters();
            kt.reset_counters();
        }
        if spec.is_retained(it) {
            trace_s.push(sigma);
            trace_t.push(theta);
        }
    }
    Ok(PypFit {
        sigma: trace_s,
        theta: trace_t,
        acceptance_sigma: ks.acceptance_rate(),
        acceptance_theta: kt.acceptance_rate(),
    })
}
