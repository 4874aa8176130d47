use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::invalid;
use crate::linalg::{cholesky_strict, sample_mvn_canonical, standard_normal_vector};
use crate::mcmc::{ChainSpec, Trace};
use crate::random::{truncated_normal, GammaRate, Normal, Truncation};
use crate::spatial::lattice::Lattice;
use crate::spatial::model::{PanelData, SpatialHyper, SpatialState};
use crate::Result;

/// Which additive term to leave out of a residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Beta,
    Gamma,
    Xi,
    Theta,
    Phi,
    None,
}

/// ω minus every predictor term except `keep`, as an I × T matrix.
pub fn partial_residual(
    state: &SpatialState,
    data: &PanelData,
    lattice: &Lattice,
    keep: Term,
) -> DMatrix<f64> {
    let x = data.x();
    let times = data.times();
    DMatrix::from_fn(data.n_units(), data.n_times(), |i, t| {
        let mut r = state.omega[(i, t)];
        if keep != Term::Beta {
            r -= x.row(i).transpose().dot(&state.beta);
        }
        if keep != Term::Gamma && lattice.n_regions > 0 {
            r -= state.gamma[lattice.region[i]];
        }
        if keep != Term::Xi {
            r -= state.xi * times[t];
        }
        if keep != Term::Theta {
            r -= state.theta[(i, t)];
        }
        if keep != Term::Phi {
            r -= state.phi[(i, t)];
        }
        r
    })
}

/// Step 1: ω_{i,t} from N(η_{i,t}, 1/κ_t) truncated to (0, ∞) when y = 1 and
/// to (−∞, 0] when y = 0.
pub fn sample_omega_trunc<R: Rng + ?Sized>(
    state: &mut SpatialState,
    data: &PanelData,
    lattice: &Lattice,
    rng: &mut R,
) {
    let eta = state.predictor(data, lattice);
    for t in 0..data.n_times() {
        let sd = 1.0 / state.kappa[t].sqrt();
        for i in 0..data.n_units() {
            let side = if data.y(i, t) {
                Truncation::Above(0.0)
            } else {
                Truncation::AtMost(0.0)
            };
            state.omega[(i, t)] = truncated_normal(rng, eta[(i, t)], sd, side);
        }
    }
}

/// Step 2 in canonical form: precision σ₀⁻²I + Σ_t κ_t XᵀX and
/// b = Σ_{i,t} κ_t x_i r_{i,t}.
pub fn beta_conditional(
    state: &SpatialState,
    data: &PanelData,
    lattice: &Lattice,
    hyper: &SpatialHyper,
) -> (DMatrix<f64>, DVector<f64>) {
    let x = data.x();
    let k = x.ncols();
    let kappa_sum = state.kappa.sum();
    let prec = DMatrix::identity(k, k) / hyper.sigma2_0 + x.transpose() * x * kappa_sum;
    let r = partial_residual(state, data, lattice, Term::Beta);
    let weighted = r * &state.kappa;
    (prec, x.transpose() * weighted)
}

pub fn sample_beta<R: Rng + ?Sized>(
    state: &mut SpatialState,
    data: &PanelData,
    lattice: &Lattice,
    hyper: &SpatialHyper,
    rng: &mut R,
) -> Result<()> {
    if data.n_covariates() == 0 {
        return Ok(());
    }
    let (prec, b) = beta_conditional(state, data, lattice, hyper);
    let chol = cholesky_strict(prec, "beta full conditional precision")?;
    state.beta = sample_mvn_canonical(&b, &chol, rng).0;
    Ok(())
}

/// Step 3: precision σ₀⁻²W* + ZᵀΣ⁻¹Z, where ZᵀΣ⁻¹Z is diagonal with
/// entries (Σ_t κ_t)·(units in region ℓ).
pub fn gamma_conditional(
    state: &SpatialState,
    data: &PanelData,
    lattice: &Lattice,
    hyper: &SpatialHyper,
) -> (DMatrix<f64>, DVector<f64>) {
    let l = lattice.n_regions;
    let kappa_sum = state.kappa.sum();
    let mut prec = &lattice.w_star / hyper.sigma2_0;
    for (r, &size) in lattice.region_sizes().iter().enumerate() {
        prec[(r, r)] += kappa_sum * size as f64;
    }
    let resid = partial_residual(state, data, lattice, Term::Gamma) * &state.kappa;
    let mut b = DVector::zeros(l);
    for (i, &r) in lattice.region.iter().enumerate() {
        b[r] += resid[i];
    }
    (prec, b)
}

pub fn sample_gamma_car<R: Rng + ?Sized>(
    state: &mut SpatialState,
    data: &PanelData,
    lattice: &Lattice,
    hyper: &SpatialHyper,
    rng: &mut R,
) -> Result<()> {
    if lattice.n_regions == 0 {
        return Ok(());
    }
    let (prec, b) = gamma_conditional(state, data, lattice, hyper);
    let chol = cholesky_strict(prec, "region effect full conditional precision")?;
    state.gamma = sample_mvn_canonical(&b, &chol, rng).0;
    Ok(())
}

/// Step 4.
pub fn xi_conditional(
    state: &SpatialState,
    data: &PanelData,
    lattice: &Lattice,
    hyper: &SpatialHyper,
) -> Normal {
    let n = data.n_units() as f64;
    let resid = partial_residual(state, data, lattice, Term::Xi);
    let mut prec = 1.0 / hyper.sigma2_0;
    let mut b = 0.0;
    for (t, &tv) in data.times().iter().enumerate() {
        prec += state.kappa[t] * tv * tv * n;
        b += state.kappa[t] * tv * resid.column(t).sum();
    }
    Normal {
        mean: b / prec,
        var: 1.0 / prec,
    }
}

pub fn sample_xi<R: Rng + ?Sized>(
    state: &mut SpatialState,
    data: &PanelData,
    lattice: &Lattice,
    hyper: &SpatialHyper,
    rng: &mut R,
) {
    state.xi = xi_conditional(state, data, lattice, hyper).sample(rng);
}

/// Step 5 for one period: θ_t ~ N(κ_t r_t / (τ_t + κ_t), (τ_t + κ_t)⁻¹ I).
/// Returns the mean vector and the common variance.
pub fn theta_conditional(
    state: &SpatialState,
    data: &PanelData,
    lattice: &Lattice,
    t: usize,
) -> (DVector<f64>, f64) {
    let resid = partial_residual(state, data, lattice, Term::Theta);
    let var = 1.0 / (state.tau[t] + state.kappa[t]);
    (resid.column(t) * (state.kappa[t] * var), var)
}

pub fn sample_theta_t<R: Rng + ?Sized>(
    state: &mut SpatialState,
    data: &PanelData,
    lattice: &Lattice,
    rng: &mut R,
) {
    let resid = partial_residual(state, data, lattice, Term::Theta);
    for t in 0..data.n_times() {
        let var = 1.0 / (state.tau[t] + state.kappa[t]);
        let z = standard_normal_vector(data.n_units(), rng);
        let draw = resid.column(t) * (state.kappa[t] * var) + z * var.sqrt();
        state.theta.set_column(t, &draw);
    }
}

/// Step 6 for one period in canonical form: precision λ_t W + κ_t I and
/// b = κ_t r_t.
pub fn phi_conditional(
    state: &SpatialState,
    data: &PanelData,
    lattice: &Lattice,
    t: usize,
) -> (DMatrix<f64>, DVector<f64>) {
    let resid = partial_residual(state, data, lattice, Term::Phi);
    phi_conditional_from(state, lattice, &resid, t)
}

fn phi_conditional_from(
    state: &SpatialState,
    lattice: &Lattice,
    resid: &DMatrix<f64>,
    t: usize,
) -> (DMatrix<f64>, DVector<f64>) {
    let n = lattice.n_units();
    let prec = &lattice.units.w * state.lambda[t] + DMatrix::identity(n, n) * state.kappa[t];
    (prec, resid.column(t) * state.kappa[t])
}

pub fn sample_phi_t<R: Rng + ?Sized>(
    state: &mut SpatialState,
    data: &PanelData,
    lattice: &Lattice,
    rng: &mut R,
) -> Result<()> {
    let resid = partial_residual(state, data, lattice, Term::Phi);
    for t in 0..data.n_times() {
        let (prec, b) = phi_conditional_from(state, lattice, &resid, t);
        let chol = cholesky_strict(prec, "CAR effect full conditional precision")?;
        state.phi.set_column(t, &sample_mvn_canonical(&b, &chol, rng).0);
    }
    Ok(())
}

/// Step 7: subtract each period's mean from φ_t.
pub fn center_phi(state: &mut SpatialState) {
    for mut col in state.phi.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
}

/// Step 8: κ_t ~ G((ν₀ + I)/2, (ν₀ + ‖r_t‖²)/2) with r_t the full residual.
pub fn kappa_conditional(
    state: &SpatialState,
    data: &PanelData,
    lattice: &Lattice,
    hyper: &SpatialHyper,
    t: usize,
) -> Result<GammaRate> {
    let resid = partial_residual(state, data, lattice, Term::None);
    kappa_from(&resid, hyper, t)
}

fn kappa_from(resid: &DMatrix<f64>, hyper: &SpatialHyper, t: usize) -> Result<GammaRate> {
    let n = resid.nrows() as f64;
    GammaRate::new(
        0.5 * (hyper.nu_0 + n),
        0.5 * (hyper.nu_0 + resid.column(t).norm_squared()),
    )
}

pub fn sample_kappa<R: Rng + ?Sized>(
    state: &mut SpatialState,
    data: &PanelData,
    lattice: &Lattice,
    hyper: &SpatialHyper,
    rng: &mut R,
) -> Result<()> {
    let resid = partial_residual(state, data, lattice, Term::None);
    for t in 0..data.n_times() {
        state.kappa[t] = kappa_from(&resid, hyper, t)?.sample(rng);
    }
    Ok(())
}

/// Step 9: τ_t ~ G(a_τ + I/2, b_τ + ‖θ_t‖²/2).
pub fn tau_conditional(state: &SpatialState, hyper: &SpatialHyper, t: usize) -> Result<GammaRate> {
    let n = state.theta.nrows() as f64;
    GammaRate::new(
        hyper.a_tau + 0.5 * n,
        hyper.b_tau + 0.5 * state.theta.column(t).norm_squared(),
    )
}

pub fn sample_tau<R: Rng + ?Sized>(
    state: &mut SpatialState,
    hyper: &SpatialHyper,
    rng: &mut R,
) -> Result<()> {
    for t in 0..state.tau.len() {
        state.tau[t] = tau_conditional(state, hyper, t)?.sample(rng);
    }
    Ok(())
}

/// Step 10: λ_t ~ G(a_λ + rank(W)/2, b_λ + φ_tᵀWφ_t/2).
pub fn lambda_conditional(
    state: &SpatialState,
    lattice: &Lattice,
    hyper: &SpatialHyper,
    t: usize,
) -> Result<GammaRate> {
    let phi_t: Vec<f64> = state.phi.column(t).iter().copied().collect();
    GammaRate::new(
        hyper.a_lambda + 0.5 * lattice.units.rank as f64,
        hyper.b_lambda + 0.5 * lattice.units.quad_form(&phi_t),
    )
}

pub fn sample_lambda<R: Rng + ?Sized>(
    state: &mut SpatialState,
    lattice: &Lattice,
    hyper: &SpatialHyper,
    rng: &mut R,
) -> Result<()> {
    for t in 0..state.lambda.len() {
        state.lambda[t] = lambda_conditional(state, lattice, hyper, t)?.sample(rng);
    }
    Ok(())
}

/// Parameters held fixed instead of sampled. A fixed value also replaces
/// the initial value.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpatialOptions {
    pub fixed_tau: Option<f64>,
    pub fixed_lambda: Option<f64>,
    pub fixed_xi: Option<f64>,
}

impl SpatialOptions {
    fn apply(&self, state: &mut SpatialState) {
        if let Some(v) = self.fixed_tau {
            state.tau.fill(v);
        }
        if let Some(v) = self.fixed_lambda {
            state.lambda.fill(v);
        }
        if let Some(v) = self.fixed_xi {
            state.xi = v;
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("tau", self.fixed_tau), ("lambda", self.fixed_lambda)] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(invalid!("fixed {name} must be positive and finite"));
                }
            }
        }
        if self.fixed_xi.is_some_and(|v| !v.is_finite()) {
            return Err(invalid!("fixed xi must be finite"));
        }
        Ok(())
    }
}

/// One ten-step sweep.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    state: &mut SpatialState,
    data: &PanelData,
    lattice: &Lattice,
    hyper: &SpatialHyper,
    options: &SpatialOptions,
    rng: &mut R,
) -> Result<()> {
    sample_omega_trunc(state, data, lattice, rng);
    sample_beta(state, data, lattice, hyper, rng)?;
    sample_gamma_car(state, data, lattice, hyper, rng)?;
    if options.fixed_xi.is_none() {
        sample_xi(state, data, lattice, hyper, rng);
    }
    sample_theta_t(state, data, lattice, rng);
    sample_phi_t(state, data, lattice, rng)?;
    center_phi(state);
    sample_kappa(state, data, lattice, hyper, rng)?;
    if options.fixed_tau.is_none() {
        sample_tau(state, hyper, rng)?;
    }
    if options.fixed_lambda.is_none() {
        sample_lambda(state, lattice, hyper, rng)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialFit {
    pub beta: Vec<Trace>,
    pub gamma: Vec<Trace>,
    pub xi: Trace,
    pub kappa: Vec<Trace>,
    pub tau: Vec<Trace>,
    pub lambda: Vec<Trace>,
    /// Posterior mean of θ_{i,t} + φ_{i,t}, I × T.
    pub effect_mean: DMatrix<f64>,
    /// Largest |Σ_i φ_{i,t}| seen after any sweep.
    pub max_phi_sum: f64,
}

pub fn fit_spatial(
    data: &PanelData,
    lattice: &Lattice,
    hyper: &SpatialHyper,
    chain: &ChainSpec,
    options: &SpatialOptions,
) -> Result<SpatialFit> {
    hyper.validate()?;
    chain.validate()?;
    options.validate()?;
    data.check_lattice(lattice)?;
    let mut rng = chain.rng();
    let mut state = SpatialState::initial(data, lattice.n_regions, &mut rng);
    options.apply(&mut state);
    let kept = chain.retained();
    let t_len = data.n_times();
    let traces = |prefix: &str, n: usize| -> Vec<Trace> {
        (1..=n)
            .map(|j| Trace::with_capacity(format!("{prefix}{j}"), kept))
            .collect()
    };
    let mut fit = SpatialFit {
        beta: traces("beta", data.n_covariates()),
        gamma: traces("gamma", lattice.n_regions),
        xi: Trace::with_capacity("xi", kept),
        kappa: traces("kappa", t_len),
        tau: traces("tau", t_len),
        lambda: traces("lambda", t_len),
        effect_mean: DMatrix::zeros(data.n_units(), t_len),
        max_phi_sum: 0.0,
    };
    for iter in 1..=chain.total_iterations {
        gibbs_sweep(&mut state, data, lattice, hyper, options, &mut rng)?;
        for col in state.phi.column_iter() {
            fit.max_phi_sum = fit.max_phi_sum.max(col.sum().abs());
        }
        if !chain.is_retained(iter) {
            continue;
        }
        let push = |traces: &mut [Trace], values: &DVector<f64>| {
            for (tr, &v) in traces.iter_mut().zip(values.iter()) {
                tr.push(v);
            }
        };
        push(&mut fit.beta, &state.beta);
        push(&mut fit.gamma, &state.gamma);
        push(&mut fit.kappa, &state.kappa);
        push(&mut fit.tau, &state.tau);
        push(&mut fit.lambda, &state.lambda);
        fit.xi.push(state.xi);
        fit.effect_mean += &state.theta + &state.phi;
    }
    fit.effect_mean /= kept as f64;
    Ok(fit)
}
