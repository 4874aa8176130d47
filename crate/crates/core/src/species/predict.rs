//! Predictive distribution of the number of new species in a further
//! sample of size n*.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::partition::PartitionParams;
use super::stirling::StirlingTable;
use super::AbundanceData;
use crate::error::invalid;
use crate::mcmc::summarize_draws;
use crate::mcmc::PosteriorSummary;
use crate::special::{ln_choose, ln_rising, log_sum_exp};
use crate::{Error, Result};

/// Simulated new-species counts, one or more per posterior draw.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionDraws {
    pub n_star: u64,
    pub k_draws: Vec<u64>,
}

impl PredictionDraws {
    /// Empirical law of the draws on {0, …, n*}.
    pub fn distribution(&self) -> Vec<f64> {
        let mut p = alloc::vec![0.0; self.n_star as usize + 1];
        for &k in &self.k_draws {
            p[k as usize] += 1.0;
        }
        let total = self.k_draws.len() as f64;
        p.iter_mut().for_each(|v| *v /= total);
        p
    }

    pub fn summary(&self) -> Result<PosteriorSummary> {
        let x: Vec<f64> = self.k_draws.iter().map(|&k| k as f64).collect();
        summarize_draws(&x)
    }
}

/// Total-variation distance between two laws on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    0.5 * (0..n)
        .map(|i| (p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Extend the observed sample by n* draws from the predictive rule, once
/// per replicate of each posterior draw, and count new species.
///
/// Only the split between "new" and "some existing species" affects the
/// count, and under both processes that split depends on the partition
/// through (n, K) alone, so the simulation tracks just those two numbers.
pub fn predict_new_species_sim<R: Rng + ?Sized>(
    data: &AbundanceData,
    draws: &[PartitionParams],
    n_star: u64,
    replicates_per_draw: usize,
    rng: &mut R,
) -> Result<PredictionDraws> {
    if draws.is_empty() {
        return Err(invalid!("no posterior draws supplied"));
    }
    if replicates_per_draw == 0 {
        return Err(invalid!("replicates_per_draw must be positive"));
    }
    let mut k_draws = Vec::with_capacity(draws.len() * replicates_per_draw);
    for p in draws {
        for _ in 0..replicates_per_draw {
            let mut k = data.k();
            let mut fresh = 0u64;
            for s in 0..n_star {
                if rng.random::<f64>() < p.new_species_probability(data.n() + s, k) {
                    k += 1;
                    fresh += 1;
                }
            }
            k_draws.push(fresh);
        }
    }
    Ok(PredictionDraws { n_star, k_draws })
}

/// P(K_{n*} = k | θ) for k = 0..n* under the Dirichlet process:
///
/// θ^k / (θ+n)_{n*} Σ_{l=k}^{n*} C(n*, l) |s(l, k)| (n)_{n*−l}.
pub fn closed_form_distribution(
    n: u64,
    theta: f64,
    n_star: u64,
    table: &StirlingTable,
) -> Result<Vec<f64>> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(invalid!("theta must be positive, got {theta}"));
    }
    if n_star as usize > table.max_row() {
        return Err(Error::TooLarge(alloc::format!(
            "n_star = {n_star} exceeds the Stirling table (max {})",
            table.max_row()
        )));
    }
    let ns = n_star as usize;
    let nf = n as f64;
    let ln_norm = ln_rising(theta + nf, n_star as f64);
    let mut out = Vec::with_capacity(ns + 1);
    let mut terms = Vec::with_capacity(ns + 1);
    for k in 0..=ns {
        terms.clear();
        for l in k..=ns {
            let s = table.ln(l, k)?;
            if s == f64::NEG_INFINITY {
                continue;
            }
            let rising = if n == 0 && l < ns {
                f64::NEG_INFINITY
            } else {
                ln_rising(nf, (ns - l) as f64)
            };
            terms.push(ln_choose(n_star, l as u64) + s + rising);
        }
        let lp = k as f64 * theta.ln() - ln_norm + log_sum_exp(&terms);
        out.push(lp.exp());
    }
    let total: f64 = out.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::Normalization(total));
    }
    out.iter_mut().for_each(|v| *v /= total);
    Ok(out)
}

/// Average of the closed-form laws over posterior draws of θ.
pub fn closed_form_pooled(
    data: &AbundanceData,
    thetas: &[f64],
    n_star: u64,
    table: &StirlingTable,
) -> Result<Vec<f64>> {
    if thetas.is_empty() {
        return Err(invalid!("no posterior draws supplied"));
    }
    let mut pooled = alloc::vec![0.0; n_star as usize + 1];
    for &t in thetas {
        let p = closed_form_distribution(data.n(), t, n_star, table)?;
        pooled.iter_mut().zip(&p).for_each(|(a, b)| *a += b);
    }
    let m = thetas.len() as f64;
    pooled.iter_mut().for_each(|v| *v /= m);
    Ok(pooled)
}

fn sample_index<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &v) in p.iter().enumerate() {
        acc += v;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

/// For each θ draw, sample the new-species count from the closed-form law
/// (`replicates_per_draw` times). Dirichlet process only.
pub fn predict_new_species_closed<R: Rng + ?Sized>(
    data: &AbundanceData,
    thetas: &[f64],
    n_star: u64,
    replicates_per_draw: usize,
    table: &StirlingTable,
    rng: &mut R,
) -> Result<PredictionDraws> {
    if thetas.is_empty() {
        return Err(invalid!("no posterior draws supplied"));
    }
    if replicates_per_draw == 0 {
        return Err(invalid!("replicates_per_draw must be positive"));
    }
    let mut k_draws = Vec::with_capacity(thetas.len() * replicates_per_draw);
    for &t in thetas {
        let p = closed_form_distribution(data.n(), t, n_star, table)?;
        for _ in 0..replicates_per_draw {
            k_draws.push(sample_index(&p, rng) as u64);
        }
    }
    Ok(PredictionDraws { n_star, k_draws })
}
