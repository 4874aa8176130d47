//! Gaussian-process regression y = f(x) + ε with a power exponential
//! covariance, fitted by Gibbs sampling with a Metropolis step for the
//! range parameter φ.

mod model;
mod sampler;

pub use model::{
    empirical_bayes, power_exp_corr, power_exp_cov, synth_gp_data, true_function, GpData,
    GpHyper, SyntheticGp,
};
pub use sampler::{
    fit_gp, fit_gp_from, gibbs_step_mu, gibbs_step_sigma2, gibbs_step_tau2, gibbs_step_theta,
    metropolis_step_phi, mu_conditional, phi_log_target, posterior_band, sigma2_conditional,
    tau2_conditional, theta_conditional, BandPoint, CorrFactor, GpFit, GpOptions, GpState,
};
