use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::special::ln_beta;
use crate::{Error, Result};

/// Largest number of clusters for which the permutation sum is attempted.
pub const MAX_STICK_BREAKING_CLUSTERS: usize = 9;

/// Stick-breaking prior whose breaks are Beta(a, b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StickBreakingSpec {
    pub a: f64,
    pub b: f64,
}

impl StickBreakingSpec {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(crate::error::invalid!("Beta parameters must be positive, got ({a}, {b})"));
        }
        Ok(Self { a, b })
    }

    /// The Dirichlet process: breaks are Beta(1, θ).
    pub fn dirichlet(theta: f64) -> Result<Self> {
        Self::new(1.0, theta)
    }

    /// E[z^x (1−z)^y] for z ~ Beta(a, b).
    pub fn gamma_moment(&self, x: f64, y: f64) -> f64 {
        (ln_beta(self.a + x, self.b + y) - ln_beta(self.a, self.b)).exp()
    }
}

/// EPPF of a stick-breaking prior, summing over every ordering of the
/// clusters:
///
/// Σ_σ ∏_k γ(m_{σ_k}, S_{k+1}) / (1 − γ(0, S_k)),  S_k = Σ_{j≥k} m_{σ_j}.
///
/// The sum has K! terms, so K is capped at
/// [`MAX_STICK_BREAKING_CLUSTERS`].
pub fn stick_breaking_eppf(sizes: &[u64], spec: StickBreakingSpec) -> Result<f64> {
    let k = sizes.len();
    if k > MAX_STICK_BREAKING_CLUSTERS {
        return Err(Error::TooLarge(alloc::format!(
            "{k} clusters need {k}! permutation terms; the limit is {MAX_STICK_BREAKING_CLUSTERS}"
        )));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let mut perm: Vec<u64> = sizes.to_vec();
    let term = |order: &[u64]| -> f64 {
        let mut tail: u64 = order.iter().sum();
        let mut prod = 1.0;
        for &m in order {
            let rest = tail - m;
            prod *= spec.gamma_moment(m as f64, rest as f64)
                / (1.0 - spec.gamma_moment(0.0, tail as f64));
            tail = rest;
        }
        prod
    };
    // Heap's algorithm, iterative form.
    let mut total = term(&perm);
    let mut c = alloc::vec![0usize; k];
    let mut i = 1;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            total += term(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::partition::crp_log_eppf_closed;

    #[test]
    fn singleton_is_one() {
        for spec in [StickBreakingSpec::new(0.7, 3.0).unwrap(), StickBreakingSpec::dirichlet(2.0).unwrap()] {
            assert!((stick_breaking_eppf(&[1], spec).unwrap() - 1.0).abs() < 1e-14);
            assert!((spec.gamma_moment(0.0, 0.0) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dirichlet_case_matches_crp() {
        let spec = StickBreakingSpec::dirichlet(1.0).unwrap();
        let v = stick_breaking_eppf(&[2, 1], spec).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-14);
        let spec = StickBreakingSpec::dirichlet(2.5).unwrap();
        let v = stick_breaking_eppf(&[3, 1, 2, 1], spec).unwrap();
        assert!((v.ln() - crp_log_eppf_closed(&[3, 1, 2, 1], 2.5)).abs() < 1e-10);
    }

    #[test]
    fn permutation_invariant() {
        let spec = StickBreakingSpec::new(0.8, 1.7).unwrap();
        let a = stick_breaking_eppf(&[4, 1, 2], spec).unwrap();
        let b = stick_breaking_eppf(&[2, 4, 1], spec).unwrap();
        assert!((a - b).abs() < 1e-15 * a.max(1.0) * 10.0);
    }

    #[test]
    fn refuses_many_clusters() {
        let spec = StickBreakingSpec::dirichlet(1.0).unwrap();
        assert!(matches!(
            stick_breaking_eppf(&[1; 10], spec),
            Err(Error::TooLarge(_))
        ));
    }
}
