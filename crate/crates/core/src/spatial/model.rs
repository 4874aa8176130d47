use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::invalid;
use crate::random::{truncated_normal, Truncation};
use crate::special::student_t_cdf;
use crate::spatial::lattice::Lattice;
use crate::Result;

/// Binary panel y_{i,t} with time-constant covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelData {
    /// I × T.
    y: DMatrix<u8>,
    /// I × K, one row per unit.
    x: DMatrix<f64>,
    /// Value of t entering ξ t, one per column of `y`.
    times: Vec<f64>,
}

impl PanelData {
    pub fn new(y: DMatrix<u8>, x: DMatrix<f64>, times: Vec<f64>) -> Result<Self> {
        if y.nrows() == 0 || y.ncols() == 0 {
            return Err(invalid!("panel is empty"));
        }
        if x.nrows() != y.nrows() {
            return Err(invalid!(
                "{} covariate rows for {} units",
                x.nrows(),
                y.nrows()
            ));
        }
        if times.len() != y.ncols() {
            return Err(invalid!("{} time values for {} periods", times.len(), y.ncols()));
        }
        if y.iter().any(|&v| v > 1) {
            return Err(invalid!("responses must be 0 or 1"));
        }
        if x.iter().chain(&times).any(|v| !v.is_finite()) {
            return Err(invalid!("covariates and times must be finite"));
        }
        Ok(Self { y, x, times })
    }

    /// Times 1..=T.
    pub fn with_unit_times(y: DMatrix<u8>, x: DMatrix<f64>) -> Result<Self> {
        let times = (1..=y.ncols()).map(|t| t as f64).collect();
        Self::new(y, x, times)
    }

    pub fn y(&self, i: usize, t: usize) -> bool {
        self.y[(i, t)] == 1
    }

    pub fn y_matrix(&self) -> &DMatrix<u8> {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_units(&self) -> usize {
        self.y.nrows()
    }

    pub fn n_times(&self) -> usize {
        self.y.ncols()
    }

    pub fn n_covariates(&self) -> usize {
        self.x.ncols()
    }

    pub fn check_lattice(&self, lattice: &Lattice) -> Result<()> {
        if lattice.n_units() != self.n_units() {
            return Err(invalid!(
                "lattice has {} units, panel has {}",
                lattice.n_units(),
                self.n_units()
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialHyper {
    pub sigma2_0: f64,
    pub nu_0: f64,
    pub a_tau: f64,
    pub b_tau: f64,
    pub a_lambda: f64,
    pub b_lambda: f64,
}

/// b_λ that makes the prior SDs of θ and φ agree: 0.7² m̄ b_τ.
pub fn elicit_b_lambda(mean_neighbors: f64, b_tau: f64) -> Result<f64> {
    if !(mean_neighbors > 0.0) || !(b_tau > 0.0) {
        return Err(invalid!("mean neighbour count and b_tau must be positive"));
    }
    Ok(0.49 * mean_neighbors * b_tau)
}

impl SpatialHyper {
    /// σ₀² = 100, ν₀ = a_τ = b_τ = a_λ = 2 and b_λ elicited from m̄.
    pub fn with_defaults(mean_neighbors: f64) -> Result<Self> {
        Ok(Self {
            sigma2_0: 100.0,
            nu_0: 2.0,
            a_tau: 2.0,
            b_tau: 2.0,
            a_lambda: 2.0,
            b_lambda: elicit_b_lambda(mean_neighbors, 2.0)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("sigma2_0", self.sigma2_0),
            ("nu_0", self.nu_0),
            ("a_tau", self.a_tau),
            ("b_tau", self.b_tau),
            ("a_lambda", self.a_lambda),
            ("b_lambda", self.b_lambda),
        ];
        for (name, v) in all {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid!("{name} must be positive and finite, got {v}"));
            }
        }
        Ok(())
    }
}

/// π = F_ν(η), the Student-t CDF.
pub fn t_link(eta: f64, nu_0: f64) -> f64 {
    student_t_cdf(eta, nu_0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialState {
    /// I × T latent utilities.
    pub omega: DMatrix<f64>,
    pub theta: DMatrix<f64>,
    pub phi: DMatrix<f64>,
    pub beta: DVector<f64>,
    pub gamma: DVector<f64>,
    pub xi: f64,
    pub kappa: DVector<f64>,
    pub tau: DVector<f64>,
    pub lambda: DVector<f64>,
}

impl SpatialState {
    /// ω from standard normals truncated to agree with y; effects 0;
    /// precisions 1.
    pub fn initial<R: Rng + ?Sized>(data: &PanelData, n_regions: usize, rng: &mut R) -> Self {
        let (n, t_len) = (data.n_units(), data.n_times());
        let omega = DMatrix::from_fn(n, t_len, |i, t| {
            let side = if data.y(i, t) {
                Truncation::Above(0.0)
            } else {
                Truncation::AtMost(0.0)
            };
            truncated_normal(rng, 0.0, 1.0, side)
        });
        Self {
            omega,
            theta: DMatrix::zeros(n, t_len),
            phi: DMatrix::zeros(n, t_len),
            beta: DVector::zeros(data.n_covariates()),
            gamma: DVector::zeros(n_regions),
            xi: 0.0,
            kappa: DVector::from_element(t_len, 1.0),
            tau: DVector::from_element(t_len, 1.0),
            lambda: DVector::from_element(t_len, 1.0),
        }
    }

    /// x_iᵀβ + z_iᵀγ + ξ t, the part of the predictor shared by unit i at
    /// time t apart from the random effects.
    pub fn fixed_effect(&self, data: &PanelData, lattice: &Lattice, i: usize, t: usize) -> f64 {
        let mut v = data.x().row(i).transpose().dot(&self.beta) + self.xi * data.times()[t];
        if lattice.n_regions > 0 {
            v += self.gamma[lattice.region[i]];
        }
        v
    }

    /// Full linear predictor η_{i,t} + φ_{i,t}.
    pub fn predictor(&self, data: &PanelData, lattice: &Lattice) -> DMatrix<f64> {
        DMatrix::from_fn(data.n_units(), data.n_times(), |i, t| {
            self.fixed_effect(data, lattice, i, t) + self.theta[(i, t)] + self.phi[(i, t)]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elicitation() {
        assert!((elicit_b_lambda(4.0, 2.0).unwrap() - 3.92).abs() < 1e-12);
        assert!((elicit_b_lambda(1.0, 1.0).unwrap() - 0.49).abs() < 1e-12);
        assert!(elicit_b_lambda(0.0, 1.0).is_err());
    }

    #[test]
    fn link_values() {
        assert!((t_link(0.0, 2.0) - 0.5).abs() < 1e-14);
        assert!((t_link(1.0, 1.0) - 0.75).abs() < 1e-12);
        assert!((t_link(1.0, 2.0) - 0.788_675_134_594_813).abs() < 1e-10);
    }

    #[test]
    fn panel_validation() {
        let y = DMatrix::from_element(2, 3, 1u8);
        assert!(PanelData::with_unit_times(y.clone(), DMatrix::zeros(3, 1)).is_err());
        assert!(PanelData::with_unit_times(DMatrix::from_element(2, 3, 2u8), DMatrix::zeros(2, 1)).is_err());
        let d = PanelData::with_unit_times(y, DMatrix::zeros(2, 1)).unwrap();
        assert_eq!(d.times(), &[1.0, 2.0, 3.0]);
    }
}
