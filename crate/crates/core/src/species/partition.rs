//! Partition laws of the Chinese restaurant and Pitman-Yor processes.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::AbundanceData;
use crate::error::invalid;
use crate::special::ln_gamma;
use crate::Result;

/// Pitman-Yor parameters; `sigma = 0` is the Chinese restaurant process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionParams {
    pub theta: f64,
    pub sigma: f64,
}

impl PartitionParams {
    pub fn crp(theta: f64) -> Result<Self> {
        Self::pyp(theta, 0.0)
    }

    /// Requires 0 ≤ σ < 1 and θ > −σ (θ > 0 when σ = 0).
    pub fn pyp(theta: f64, sigma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&sigma) {
            return Err(invalid!("discount sigma must lie in [0, 1), got {sigma}"));
        }
        if !(theta + sigma > 0.0) || !theta.is_finite() {
            return Err(invalid!(
                "strength theta must exceed -sigma = {}, got {theta}",
                -sigma
            ));
        }
        Ok(Self { theta, sigma })
    }

    /// Probability that observation n+1 is a new species, given K species
    /// among the first n.
    #[inline]
    pub fn new_species_probability(&self, n: u64, k: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        (self.theta + self.sigma * k as f64) / (self.theta + n as f64)
    }
}

/// Log EPPF as the product of predictive probabilities, seating the
/// members of each cluster in turn. This is the reference evaluator.
pub fn log_eppf(sizes: &[u64], p: PartitionParams) -> f64 {
    let (theta, sigma) = (p.theta, p.sigma);
    let mut lp = 0.0;
    let mut seated = 0u64;
    for (k, &m) in sizes.iter().enumerate() {
        if seated > 0 {
            lp += (theta + sigma * k as f64).ln() - (theta + seated as f64).ln();
        }
        seated += 1;
        for c in 1..m {
            lp += (c as f64 - sigma).ln() - (theta + seated as f64).ln();
            seated += 1;
        }
    }
    lp
}

/// θ^K Γ(θ) / Γ(θ+n) ∏ Γ(m_j), in logs.
pub fn crp_log_eppf_closed(sizes: &[u64], theta: f64) -> f64 {
    if sizes.is_empty() {
        return 0.0;
    }
    let n: u64 = sizes.iter().sum();
    sizes.len() as f64 * theta.ln() + ln_gamma(theta) - ln_gamma(theta + n as f64)
        + sizes.iter().map(|&m| ln_gamma(m as f64)).sum::<f64>()
}

/// Γ(θ+1)/Γ(θ+n) ∏_{j=1}^{K−1}(θ+jσ) ∏_j Γ(m_j−σ)/Γ(1−σ), in logs.
pub fn pyp_log_eppf_closed(sizes: &[u64], p: PartitionParams) -> f64 {
    if sizes.is_empty() {
        return 0.0;
    }
    let (theta, sigma) = (p.theta, p.sigma);
    let n: u64 = sizes.iter().sum();
    let k = sizes.len();
    let ln_g1 = ln_gamma(1.0 - sigma);
    ln_gamma(theta + 1.0) - ln_gamma(theta + n as f64)
        + (1..k).map(|j| (theta + j as f64 * sigma).ln()).sum::<f64>()
        + sizes
            .iter()
            .map(|&m| ln_gamma(m as f64 - sigma) - ln_g1)
            .sum::<f64>()
}

pub fn crp_log_eppf(data: &AbundanceData, theta: f64) -> Result<f64> {
    Ok(log_eppf(data.sizes(), PartitionParams::crp(theta)?))
}

pub fn pyp_log_eppf(data: &AbundanceData, p: PartitionParams) -> f64 {
    log_eppf(data.sizes(), p)
}

/// Predictive probabilities: entry j < K is joining species j, entry K is a
/// new species.
pub fn ppf(data: &AbundanceData, p: PartitionParams) -> Vec<f64> {
    let n = data.n();
    let k = data.k();
    if n == 0 {
        return alloc::vec![1.0];
    }
    let denom = p.theta + n as f64;
    let mut out: Vec<f64> = data
        .sizes()
        .iter()
        .map(|&m| (m as f64 - p.sigma) / denom)
        .collect();
    out.push(p.new_species_probability(n, k));
    out
}

pub fn crp_ppf(data: &AbundanceData, theta: f64) -> Result<Vec<f64>> {
    Ok(ppf(data, PartitionParams::crp(theta)?))
}

pub fn pyp_ppf(data: &AbundanceData, p: PartitionParams) -> Vec<f64> {
    ppf(data, p)
}

/// E[K^n] = Σ_{i=1}^n θ/(θ+i−1).
pub fn expected_k_crp(n: u64, theta: f64) -> f64 {
    (1..=n).map(|i| theta / (theta + (i - 1) as f64)).sum()
}

/// E[K^n] for the Pitman-Yor process through
/// E[K^i] = E[K^{i−1}] + (θ + σ E[K^{i−1}]) / (θ + i − 1).
pub fn expected_k_pyp(n: u64, p: PartitionParams) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut e = 1.0;
    for i in 2..=n {
        e += (p.theta + p.sigma * e) / (p.theta + (i - 1) as f64);
    }
    e
}
