#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::BoundedTransform;
use crate::random::{open_unit, standard_normal};
use crate::{Error, Result};

/// Batch-wise step-size adaptation applied during burn-in only.
///
/// After every `window` proposals the batch acceptance rate is compared
/// with the target band: above `high` the step grows by 10%, below `low`
/// it shrinks by 10%.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptation {
    pub window: u64,
    pub low: f64,
    pub high: f64,
}

impl Default for Adaptation {
    fn default() -> Self {
        Self {
            window: 50,
            low: 0.3,
            high: 0.5,
        }
    }
}

/// Outcome of one Metropolis update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwmStep {
    pub value: f64,
    /// Log target (original scale, no Jacobian) at `value`.
    pub log_target: f64,
    pub accepted: bool,
}

/// Gaussian random-walk Metropolis on a transformed scale.
#[derive(Debug, Clone, PartialEq)]
pub struct RwmKernel {
    pub transform: BoundedTransform,
    /// Proposal standard deviation on the transformed scale.
    pub step_size: f64,
    pub accept_count: u64,
    pub propose_count: u64,
    adaptation: Option<Adaptation>,
    window_accepts: u64,
    window_proposals: u64,
}

impl RwmKernel {
    pub fn new(transform: BoundedTransform, step_size: f64) -> Result<Self> {
        if !(step_size > 0.0 && step_size.is_finite()) {
            return Err(crate::error::invalid!(
                "proposal step size must be positive, got {step_size}"
            ));
        }
        Ok(Self {
            transform,
            step_size,
            accept_count: 0,
            propose_count: 0,
            adaptation: None,
            window_accepts: 0,
            window_proposals: 0,
        })
    }

    pub fn with_adaptation(mut self, adaptation: Adaptation) -> Self {
        self.adaptation = Some(adaptation);
        self
    }

    pub fn is_adapting(&self) -> bool {
        self.adaptation.is_some()
    }

    /// Freeze the step size; call once burn-in ends.
    pub fn stop_adaptation(&mut self) {
        self.adaptation = None;
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.propose_count == 0 {
            0.0
        } else {
            self.accept_count as f64 / self.propose_count as f64
        }
    }

    pub fn reset_counters(&mut self) {
        self.accept_count = 0;
        self.propose_count = 0;
    }

    /// One update of `current` targeting the density `log_target` (original
    /// scale). The Jacobian of the transform is folded in automatically.
    pub fn update<R, F>(&mut self, current: f64, mut log_target: F, rng: &mut R) -> Result<f64>
    where
        R: Rng + ?Sized,
        F: FnMut(f64) -> f64,
    {
        let lp = log_target(current);
        self.update_cached(current, lp, log_target, rng)
            .map(|step| step.value)
    }

    /// As [`update`](Self::update) but with the log target at `current`
    /// already known. Returns the log target at the returned value so
    /// callers can chain updates without re-evaluating.
    pub fn update_cached<R, F>(
        &mut self,
        current: f64,
        current_log_target: f64,
        mut log_target: F,
        rng: &mut R,
    ) -> Result<RwmStep>
    where
        R: Rng + ?Sized,
        F: FnMut(f64) -> f64,
    {
        if !current_log_target.is_finite() {
            return Err(Error::NonFiniteTarget(current_log_target));
        }
        let (eta, log_jac) = self.transform.apply(current)?;
        let eta_star = eta + self.step_size * standard_normal(rng);
        let proposal = self.transform.inverse(eta_star);

        let mut step = RwmStep {
            value: current,
            log_target: current_log_target,
            accepted: false,
        };
        // Proposals that round onto the boundary are rejected outright.
        if self.transform.contains(proposal) {
            let lp_star = log_target(proposal);
            if lp_star.is_finite() {
                let log_r = lp_star + self.transform.log_jacobian(eta_star)
                    - current_log_target
                    - log_jac;
                if log_r >= 0.0 || open_unit(rng).ln() < log_r {
                    step = RwmStep {
                        value: proposal,
                        log_target: lp_star,
                        accepted: true,
                    };
                }
            }
        }
        self.record(step.accepted);
        Ok(step)
    }

    fn record(&mut self, accepted: bool) {
        self.propose_count += 1;
        if accepted {
            self.accept_count += 1;
        }
        if let Some(adapt) = self.adaptation {
            self.window_proposals += 1;
            if accepted {
                self.window_accepts += 1;
            }
            if self.window_proposals >= adapt.window {
                let rate = self.window_accepts as f64 / self.window_proposals as f64;
                if rate > adapt.high {
                    self.step_size *= 1.1;
                } else if rate < adapt.low {
                    self.step_size *= 0.9;
                }
                self.window_accepts = 0;
                self.window_proposals = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcmc::ChainRng;
    use rand::SeedableRng;

    #[test]
    fn flat_target_accepts_everything() {
        let mut rng = ChainRng::seed_from_u64(9);
        let mut k = RwmKernel::new(BoundedTransform::Identity, 3.0).unwrap();
        let mut x = 2.0;
        for _ in 0..1000 {
            x = k.update(x, |_| 1.5, &mut rng).unwrap();
        }
        assert_eq!(k.accept_count, 1000);
        assert_eq!(k.acceptance_rate(), 1.0);
    }

    #[test]
    fn tiny_steps_almost_always_accept() {
        let mut k = RwmKernel::new(BoundedTransform::Identity, 1e-6).unwrap();
        let mut rng = ChainRng::seed_from_u64(2);
        let mut x = 0.3;
        for _ in 0..2000 {
            x = k.update(x, |v| -0.5 * v * v, &mut rng).unwrap();
        }
        assert!(k.acceptance_rate() > 0.99);
    }

    #[test]
    fn non_finite_current_is_fatal_and_bad_proposals_rejected() {
        let mut k = RwmKernel::new(BoundedTransform::Identity, 1.0).unwrap();
        let mut rng = ChainRng::seed_from_u64(2);
        assert!(matches!(
            k.update(0.0, |_| f64::NAN, &mut rng),
            Err(Error::NonFiniteTarget(_))
        ));
        let step = k
            .update_cached(0.0, 0.0, |_| f64::NEG_INFINITY, &mut rng)
            .unwrap();
        assert!(!step.accepted);
        assert_eq!(step.value, 0.0);
    }

    #[test]
    fn adaptation_moves_toward_band_and_freezes() {
        let mut k = RwmKernel::new(BoundedTransform::Identity, 50.0)
            .unwrap()
            .with_adaptation(Adaptation::default());
        let mut rng = ChainRng::seed_from_u64(4);
        let mut x = 0.0;
        for _ in 0..5000 {
            x = k.update(x, |v| -0.5 * v * v, &mut rng).unwrap();
        }
        assert!(k.step_size < 10.0, "step {}", k.step_size);
        k.stop_adaptation();
        let frozen = k.step_size;
        for _ in 0..500 {
            x = k.update(x, |v| -0.5 * v * v, &mut rng).unwrap();
        }
        assert_eq!(k.step_size, frozen);
    }
}
