//! Species sampling models: partition laws, parameter samplers and
//! new-species predictions.

mod data;
mod fit;
mod partition;
mod predict;
mod stick;
mod stirling;

pub use data::AbundanceData;
pub use fit::{
    crp_log_posterior, crp_moment_start, fit_crp, fit_pyp, pyp_log_posterior, CrpFit, CrpPrior,
    PypFit, PypPrior, Tuning,
};
pub use partition::{
    crp_log_eppf, crp_log_eppf_closed, crp_ppf, expected_k_crp, expected_k_pyp, log_eppf, ppf,
    pyp_log_eppf, pyp_log_eppf_closed, pyp_ppf, PartitionParams,
};
pub use predict::{
    closed_form_distribution, closed_form_pooled, predict_new_species_closed,
    predict_new_species_sim, total_variation, PredictionDraws,
};
pub use stick::{stick_breaking_eppf, StickBreakingSpec, MAX_STICK_BREAKING_CLUSTERS};
pub use stirling::{stirling_first_signless_log, StirlingTable, MAX_STIRLING_ROW};
