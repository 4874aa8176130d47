//! Spatiotemporal binary-response model with a Student-t link obtained by
//! data augmentation, exchangeable and CAR random effects per period, and a
//! region-level CAR fixed effect.

mod lattice;
mod model;
mod sampler;
mod synth;

pub use lattice::{build_car_precision, grid_edges, CarGraph, Lattice, REGION_RIDGE};
pub use model::{elicit_b_lambda, t_link, PanelData, SpatialHyper, SpatialState};
pub use sampler::{
    beta_conditional, center_phi, fit_spatial, gamma_conditional, gibbs_sweep, kappa_conditional,
    lambda_conditional, partial_residual, phi_conditional, sample_beta, sample_gamma_car,
    sample_kappa, sample_lambda, sample_omega_trunc, sample_phi_t, sample_tau, sample_theta_t,
    sample_xi, tau_conditional, theta_conditional, xi_conditional, SpatialFit, SpatialOptions,
    Term,
};
pub use synth::{synth_spatial_data, CarSampler, SpatialSynth, SpatialTruth};
