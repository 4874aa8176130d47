//! Bayesian case-study samplers with no operating-system dependencies.
//!
//! The crate is `no_std` (it needs `alloc`) and contains four model families
//! plus the chain machinery they share:
//!
//! * [`mcmc`]: chain bookkeeping, random-walk Metropolis on transformed
//!   scales, effective sample size and posterior summaries.
//! * [`gp`]: Gaussian-process nonparametric regression fitted by Gibbs
//!   sampling with a Metropolis step for the range parameter.
//! * [`dlm`]: direct-sampling AR(p) fits and the additive-outlier dynamic
//!   linear model with forward-filtering backward-sampling.
//! * [`spatial`]: the spatiotemporal probit-t model with CAR random effects.
//! * [`species`]: exchangeable partition laws (CRP, Pitman-Yor, stick
//!   breaking), parameter samplers and new-species predictors.
//!
//! Every stochastic routine takes its random stream explicitly; there is no
//! global generator. Chains use [`ChainRng`], a ChaCha8 stream cipher seeded
//! from a 64-bit seed, so a seed plus a stream id reproduces a run bit for bit.
#![no_std]
// `!(x > 0.0)` is how the validators reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

// Float methods come from `num_traits::Float`. When anything in the build
// links std (the test dependencies do) the inherent methods take over and the
// import is reported unused, hence the `allow` next to each import.

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dlm;
mod error;
pub mod gp;
pub mod linalg;
pub mod mcmc;
pub mod random;
pub mod spatial;
pub mod special;
pub mod species;

pub use error::{Error, Result};
pub use mcmc::{ChainRng, ChainSpec, PosteriorSummary, Trace};
