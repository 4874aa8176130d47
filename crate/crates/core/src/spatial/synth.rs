use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::error::invalid;
use crate::random::{standard_normal, GammaRate};
use crate::spatial::lattice::{CarGraph, Lattice};
use crate::spatial::model::PanelData;
use crate::Result;

/// Generating values for a simulated panel.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialTruth {
    pub beta: DVector<f64>,
    pub gamma: DVector<f64>,
    pub xi: f64,
    /// Precision of θ; `None` sets θ = 0.
    pub tau: Option<f64>,
    /// CAR precision of φ; `None` sets φ = 0.
    pub lambda: Option<f64>,
    /// Fixed κ_t; `None` draws κ_t ~ G(ν₀/2, ν₀/2).
    pub kappa: Option<f64>,
    pub nu_0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialSynth {
    pub data: PanelData,
    /// η_{i,t} + φ_{i,t} before the κ-scaled noise.
    pub predictor: DMatrix<f64>,
    pub theta: DMatrix<f64>,
    pub phi: DMatrix<f64>,
    pub kappa: Vec<f64>,
}

/// Draws from the intrinsic CAR(λ) prior restricted to the sum-to-zero
/// subspace of each connected component.
pub struct CarSampler {
    vectors: DMatrix<f64>,
    scales: Vec<f64>,
}

impl CarSampler {
    pub fn new(graph: &CarGraph) -> Self {
        let eig = SymmetricEigen::new(graph.w.clone());
        let tol = 1e-9 * eig.eigenvalues.amax().max(1.0);
        let mut cols = Vec::new();
        let mut scales = Vec::new();
        for (k, &e) in eig.eigenvalues.iter().enumerate() {
            if e > tol {
                cols.push(eig.eigenvectors.column(k).into_owned());
                scales.push(1.0 / e.sqrt());
            }
        }
        Self {
            vectors: DMatrix::from_columns(&cols),
            scales,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, lambda: f64, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.scales.len(), |k, _| {
            self.scales[k] * standard_normal(rng) / lambda.sqrt()
        });
        &self.vectors * z
    }
}

/// Simulates the model forward: y_{i,t} = 1{ω_{i,t} > 0} with
/// ω_{i,t} ~ N(x_iᵀβ + γ_{r(i)} + ξ t + θ_{i,t} + φ_{i,t}, 1/κ_t), t = 1..T.
pub fn synth_spatial_data<R: Rng + ?Sized>(
    lattice: &Lattice,
    x: &DMatrix<f64>,
    truth: &SpatialTruth,
    t_len: usize,
    rng: &mut R,
) -> Result<SpatialSynth> {
    let n = lattice.n_units();
    if x.nrows() != n || x.ncols() != truth.beta.len() {
        return Err(invalid!("covariate matrix must be {n} × {}", truth.beta.len()));
    }
    if truth.gamma.len() != lattice.n_regions {
        return Err(invalid!("need one region effect per region"));
    }
    if t_len == 0 {
        return Err(invalid!("need at least one period"));
    }
    let car = truth.lambda.map(|_| CarSampler::new(&lattice.units));
    let kappa_prior = GammaRate::new(0.5 * truth.nu_0, 0.5 * truth.nu_0)?;
    let mut theta = DMatrix::zeros(n, t_len);
    let mut phi = DMatrix::zeros(n, t_len);
    let mut kappa = Vec::with_capacity(t_len);
    for t in 0..t_len {
        if let Some(tau) = truth.tau {
            let sd = 1.0 / tau.sqrt();
            for i in 0..n {
                theta[(i, t)] = sd * standard_normal(rng);
            }
        }
        if let (Some(lambda), Some(car)) = (truth.lambda, &car) {
            phi.set_column(t, &car.sample(lambda, rng));
        }
        kappa.push(match truth.kappa {
            Some(k) => k,
            None => kappa_prior.sample(rng),
        });
    }
    let base = x * &truth.beta;
    let predictor = DMatrix::from_fn(n, t_len, |i, t| {
        let region = if lattice.n_regions > 0 {
            truth.gamma[lattice.region[i]]
        } else {
            0.0
        };
        base[i] + region + truth.xi * (t + 1) as f64 + theta[(i, t)] + phi[(i, t)]
    });
    let y = DMatrix::from_fn(n, t_len, |i, t| {
        let omega = predictor[(i, t)] + standard_normal(rng) / kappa[t].sqrt();
        u8::from(omega > 0.0)
    });
    Ok(SpatialSynth {
        data: PanelData::with_unit_times(y, x.clone())?,
        predictor,
        theta,
        phi,
        kappa,
    })
}
