//! Chain execution scaffold shared by every model.

mod chain;
mod diagnostics;
mod kernel;
mod trace;
mod transform;

pub use chain::{ChainRng, ChainSpec};
pub use diagnostics::{
    effective_sample_size, quantile_sorted, split_rhat, summarize, summarize_draws, PosteriorSummary,
};
pub use kernel::{Adaptation, RwmKernel, RwmStep};
pub use trace::Trace;
pub use transform::BoundedTransform;
