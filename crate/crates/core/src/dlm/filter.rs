use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::invalid;
use crate::linalg::{pinv_symmetric, psd_sqrt, standard_normal_vector, symmetrize};
use crate::special::LN_2PI;
use crate::{Error, Result};

/// Companion matrix: first row φ, ones on the subdiagonal.
pub fn build_companion(phi: &[f64]) -> DMatrix<f64> {
    let p = phi.len();
    let mut g = DMatrix::zeros(p, p);
    for (j, &v) in phi.iter().enumerate() {
        g[(0, j)] = v;
    }
    for i in 1..p {
        g[(i, i - 1)] = 1.0;
    }
    g
}

/// Forward-filter moments. Index 0 of `m` and `c` holds the prior (m₀, C₀);
/// the per-time vectors `a`, `r`, `f`, `q`, `e` are indexed from t = 1 at
/// position 0.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanCache {
    pub g: DMatrix<f64>,
    pub a: Vec<DVector<f64>>,
    pub r: Vec<DMatrix<f64>>,
    pub m: Vec<DVector<f64>>,
    pub c: Vec<DMatrix<f64>>,
    pub f: Vec<f64>,
    pub q: Vec<f64>,
    pub e: Vec<f64>,
    /// Σ_t log N(e_t; 0, Q_t).
    pub log_likelihood: f64,
}

impl KalmanCache {
    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }
}

/// Kalman filter for y_t = θ_{t,1} + ν_t, ν_t ~ N(0, V_t), and
/// θ_t = G θ_{t−1} + (η_t, 0, …, 0), η_t ~ N(0, ω).
pub fn kalman_forward(
    y: &[f64],
    obs_var: &[f64],
    phi: &[f64],
    omega: f64,
    m0: &DVector<f64>,
    c0: &DMatrix<f64>,
) -> Result<KalmanCache> {
    let p = phi.len();
    let t_len = y.len();
    if p == 0 {
        return Err(invalid!("state dimension must be at least 1"));
    }
    if obs_var.len() != t_len {
        return Err(invalid!(
            "{} observation variances for {} observations",
            obs_var.len(),
            t_len
        ));
    }
    if m0.len() != p || c0.nrows() != p || c0.ncols() != p {
        return Err(invalid!("initial moments must have dimension {p}"));
    }
    if !(omega >= 0.0) || y.iter().chain(obs_var).chain(phi).any(|v| !v.is_finite()) {
        return Err(invalid!("filter inputs must be finite with omega >= 0"));
    }
    let g = build_companion(phi);
    let gt = g.transpose();
    let mut cache = KalmanCache {
        g: g.clone(),
        a: Vec::with_capacity(t_len),
        r: Vec::with_capacity(t_len),
        m: Vec::with_capacity(t_len + 1),
        c: Vec::with_capacity(t_len + 1),
        f: Vec::with_capacity(t_len),
        q: Vec::with_capacity(t_len),
        e: Vec::with_capacity(t_len),
        log_likelihood: 0.0,
    };
    cache.m.push(m0.clone());
    cache.c.push(c0.clone());
    for t in 0..t_len {
        let a = &g * &cache.m[t];
        let mut r = &g * &cache.c[t] * &gt;
        r[(0, 0)] += omega;
        symmetrize(&mut r);
        let f = a[0];
        let q = r[(0, 0)] + obs_var[t];
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::NonPositiveVariance { t: t + 1, q });
        }
        let e = y[t] - f;
        let gain: DVector<f64> = r.column(0) / q;
        let m = &a + &gain * e;
        let mut c = &r - (&gain * gain.transpose()) * q;
        symmetrize(&mut c);
        cache.log_likelihood += -0.5 * (LN_2PI + q.ln() + e * e / q);
        cache.a.push(a);
        cache.r.push(r);
        cache.f.push(f);
        cache.q.push(q);
        cache.e.push(e);
        cache.m.push(m);
        cache.c.push(c);
    }
    Ok(cache)
}

/// Joint draw of θ_{0:T} and the number of backward steps that had to use
/// a pseudo-inverse because R_{t+1} was singular.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardDraw {
    pub states: Vec<DVector<f64>>,
    pub pinv_fallbacks: usize,
}

/// Backward sampling: θ_T ~ N(m_T, C_T), then for t = T−1, …, 0
/// θ_t ~ N(m_t + B_t(θ_{t+1} − a_{t+1}), C_t − B_t R_{t+1} B_tᵀ) with
/// B_t = C_t Gᵀ R_{t+1}⁻¹.
pub fn backward_sample<R: Rng + ?Sized>(cache: &KalmanCache, rng: &mut R) -> BackwardDraw {
    let t_len = cache.len();
    let p = cache.g.nrows();
    let mut states = alloc::vec![DVector::zeros(p); t_len + 1];
    let mut fallbacks = 0;
    states[t_len] = &cache.m[t_len] + psd_sqrt(&cache.c[t_len]) * standard_normal_vector(p, rng);
    let gt = cache.g.transpose();
    for t in (0..t_len).rev() {
        // cache.a[t] and cache.r[t] are a_{t+1}, R_{t+1}.
        let r_next = &cache.r[t];
        let cg = &cache.c[t] * &gt;
        let b = match r_next.clone().cholesky() {
            Some(ch) => ch.solve(&cg.transpose()).transpose(),
            None => {
                fallbacks += 1;
                cg * pinv_symmetric(r_next, 1e-12)
            }
        };
        let mean = &cache.m[t] + &b * (&states[t + 1] - &cache.a[t]);
        let cov = &cache.c[t] - &b * r_next * b.transpose();
        states[t] = mean + psd_sqrt(&cov) * standard_normal_vector(p, rng);
    }
    if fallbacks > 0 {
        log::warn!("backward sampling used a pseudo-inverse at {fallbacks} steps");
    }
    BackwardDraw {
        states,
        pinv_fallbacks: fallbacks,
    }
}
