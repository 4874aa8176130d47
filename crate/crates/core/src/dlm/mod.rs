//! Autoregressive fits and the additive-outlier dynamic linear model.

mod ar;
mod filter;
mod outlier;
mod synth;

pub use ar::{ar_fit_direct, lagged_design, ArFit};
pub use filter::{backward_sample, build_companion, kalman_forward, BackwardDraw, KalmanCache};
pub use outlier::{
    alpha_conditional, ffbs_step, fit_outlier_dlm, gamma_log_odds, gibbs_sweep, initial_state,
    omega_conditional, phi_conditional, sample_alpha, sample_gamma, sample_omega, sample_phi_dlm,
    DlmState, OutlierDlmFit, OutlierDlmSpec,
};
pub use synth::{synth_ar, synth_outlier_series, OutlierSeries};
