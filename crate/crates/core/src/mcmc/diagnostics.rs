use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::Trace;
use crate::error::invalid;
use crate::Result;

/// Posterior summary of one scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorSummary {
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
    pub ess: f64,
}

/// Empirical quantile of sorted data, linear interpolation between order
/// statistics (position p·(n−1)).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, if x.len() > 1 { ss / (n - 1.0) } else { 0.0 })
}

/// Effective sample size by Geyer's initial positive sequence.
///
/// Autocovariances are summed in adjacent pairs until a pair sum turns
/// non-positive. A constant trace has no autocorrelation to speak of and is
/// reported as `n`. The estimate is capped at `n`.
pub fn effective_sample_size(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return n as f64;
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let gamma = |lag: usize| -> f64 {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / nf
    };
    let g0 = gamma(0);
    if !(g0 > 0.0) || !g0.is_finite() {
        return nf;
    }
    // Σ over pairs Γ_k = γ(2k) + γ(2k+1); τ = −γ0 + 2 Σ Γ_k.
    let mut sum = 0.0;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = gamma(2 * k) + gamma(2 * k + 1);
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        k += 1;
    }
    let tau = (-g0 + 2.0 * sum) / g0;
    if !(tau > 0.0) {
        return nf;
    }
    (nf / tau).min(nf)
}

/// Mean, sd (divisor n−1), 2.5/50/97.5% quantiles and ESS.
pub fn summarize(trace: &Trace) -> Result<PosteriorSummary> {
    summarize_draws(trace.draws())
}

pub fn summarize_draws(draws: &[f64]) -> Result<PosteriorSummary> {
    if draws.len() < 2 {
        return Err(invalid!("at least two draws are needed, got {}", draws.len()));
    }
    let (mean, var) = mean_var(draws);
    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    Ok(PosteriorSummary {
        mean,
        sd: var.max(0.0).sqrt(),
        q025: quantile_sorted(&sorted, 0.025),
        q50: quantile_sorted(&sorted, 0.5),
        q975: quantile_sorted(&sorted, 0.975),
        ess: effective_sample_size(draws),
    })
}

/// Split-chain potential scale reduction factor over several chains of the
/// same parameter. Each chain is halved; chains shorter than 4 draws are
/// rejected.
pub fn split_rhat(chains: &[&[f64]]) -> Result<f64> {
    if chains.is_empty() {
        return Err(invalid!("no chains supplied"));
    }
    let len = chains.iter().map(|c| c.len()).min().unwrap_or(0);
    if len < 4 {
        return Err(invalid!("split R-hat needs at least 4 draws per chain"));
    }
    let half = len / 2;
    let mut halves: Vec<&[f64]> = Vec::with_capacity(2 * chains.len());
    for c in chains {
        halves.push(&c[..half]);
        halves.push(&c[len - half..len]);
    }
    let m = halves.len() as f64;
    let nh = half as f64;
    let stats: Vec<(f64, f64)> = halves.iter().map(|h| mean_var(h)).collect();
    let grand = stats.iter().map(|s| s.0).sum::<f64>() / m;
    let b = nh / (m - 1.0) * stats.iter().map(|s| (s.0 - grand).powi(2)).sum::<f64>();
    let w = stats.iter().map(|s| s.1).sum::<f64>() / m;
    if w == 0.0 {
        return Ok(if b == 0.0 { 1.0 } else { f64::INFINITY });
    }
    let var_plus = (nh - 1.0) / nh * w + b / nh;
    Ok((var_plus / w).sqrt())
}
