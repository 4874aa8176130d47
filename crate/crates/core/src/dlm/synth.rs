use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::index;
use rand::Rng;

use crate::error::invalid;
use crate::random::{standard_normal, truncated_normal, Truncation};
use crate::Result;

const WARM_UP: usize = 500;

/// Stationary-start AR(p) series: the recursion runs `WARM_UP` steps from
/// zero before the first returned value.
pub fn synth_ar<R: Rng + ?Sized>(phi: &[f64], v: f64, t_len: usize, rng: &mut R) -> Result<Vec<f64>> {
    if phi.is_empty() || !(v >= 0.0) {
        return Err(invalid!("need at least one coefficient and v >= 0"));
    }
    let p = phi.len();
    let sd = v.sqrt();
    let mut x = alloc::vec![0.0; p];
    x.reserve(WARM_UP + t_len);
    for _ in 0..WARM_UP + t_len {
        let n = x.len();
        let mean: f64 = phi.iter().enumerate().map(|(j, c)| c * x[n - 1 - j]).sum();
        x.push(mean + sd * standard_normal(rng));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(invalid!("AR recursion diverged; coefficients are not stationary"));
    }
    Ok(x.split_off(p + WARM_UP))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierSeries {
    pub y: Vec<f64>,
    /// Latent AR path x_t.
    pub x: Vec<f64>,
    /// Sorted 1-based outlier times.
    pub positions: Vec<usize>,
    /// Outlier sizes, aligned with `positions`.
    pub magnitudes: Vec<f64>,
}

/// y_t = x_t + α_t 1{t planted} + ε_t with ε_t ~ N(0, obs_var) and planted
/// sizes α ~ N(0, outlier_var) conditioned on |α| > min_size.
#[allow(clippy::too_many_arguments)]
pub fn synth_outlier_series<R: Rng + ?Sized>(
    phi: &[f64],
    omega: f64,
    obs_var: f64,
    t_len: usize,
    n_outliers: usize,
    outlier_var: f64,
    min_size: f64,
    rng: &mut R,
) -> Result<OutlierSeries> {
    if n_outliers > t_len {
        return Err(invalid!("cannot plant {n_outliers} outliers in {t_len} points"));
    }
    if !(obs_var >= 0.0) || !(outlier_var > 0.0) || !(min_size >= 0.0) {
        return Err(invalid!("variances must be positive and min_size non-negative"));
    }
    let x = synth_ar(phi, omega, t_len, rng)?;
    let mut positions: Vec<usize> = index::sample(rng, t_len, n_outliers)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    positions.sort_unstable();
    let sd = outlier_var.sqrt();
    let magnitudes: Vec<f64> = positions
        .iter()
        .map(|_| {
            let size = truncated_normal(rng, 0.0, sd, Truncation::Above(min_size));
            if rng.random::<bool>() {
                size
            } else {
                -size
            }
        })
        .collect();
    let noise = obs_var.sqrt();
    let mut y: Vec<f64> = x.iter().map(|&xt| xt + noise * standard_normal(rng)).collect();
    for (&pos, &a) in positions.iter().zip(&magnitudes) {
        y[pos - 1] += a;
    }
    Ok(OutlierSeries {
        y,
        x,
        positions,
        magnitudes,
    })
}
