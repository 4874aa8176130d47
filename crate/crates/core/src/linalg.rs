//! Dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::random::standard_normal;
use crate::{Error, Result};

pub type Chol = Cholesky<f64, Dyn>;

/// Jitter schedule for near-singular covariance matrices: start at
/// `1e-8 * scale` on the diagonal and grow tenfold up to `1e-4 * scale`.
pub const JITTER_START: f64 = 1e-8;
pub const JITTER_MAX: f64 = 1e-4;

/// A Cholesky factor together with the diagonal jitter that was needed.
#[derive(Debug, Clone)]
pub struct JitteredCholesky {
    pub chol: Chol,
    /// Absolute amount added to the diagonal (0 when none was needed).
    pub jitter: f64,
}

impl JitteredCholesky {
    pub fn l(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    pub fn log_det(&self) -> f64 {
        chol_log_det(&self.chol)
    }
}

/// Factor a symmetric matrix, adding diagonal jitter when the plain
/// factorization fails. `scale` sets the jitter units (typically the
/// marginal variance).
pub fn cholesky_jittered(
    m: &DMatrix<f64>,
    scale: f64,
    context: &'static str,
) -> Result<JitteredCholesky> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(context));
    }
    if let Some(chol) = m.clone().cholesky() {
        return Ok(JitteredCholesky { chol, jitter: 0.0 });
    }
    let mut rel = JITTER_START;
    while rel <= JITTER_MAX * (1.0 + 1e-9) {
        let jitter = rel * scale;
        let mut j = m.clone();
        for i in 0..j.nrows() {
            j[(i, i)] += jitter;
        }
        if let Some(chol) = j.cholesky() {
            log::debug!("{context}: factorized with diagonal jitter {jitter:e}");
            return Ok(JitteredCholesky { chol, jitter });
        }
        rel *= 10.0;
    }
    let diag = m.diagonal();
    Err(Error::NotPositiveDefinite {
        context,
        max_jitter: JITTER_MAX * scale,
        min_diag: diag.min(),
        max_diag: diag.max(),
    })
}

/// Factor a matrix that must be positive definite; no jitter.
pub fn cholesky_strict(m: DMatrix<f64>, context: &'static str) -> Result<Chol> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(context));
    }
    let diag = m.diagonal();
    let (min_diag, max_diag) = (diag.min(), diag.max());
    m.cholesky().ok_or(Error::NotPositiveDefinite {
        context,
        max_jitter: 0.0,
        min_diag,
        max_diag,
    })
}

#[inline]
pub fn chol_log_det(chol: &Chol) -> f64 {
    let l = chol.l_dirty();
    (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0
}

pub fn standard_normal_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| standard_normal(rng))
}

/// Draw from N(mean, Σ) given the lower Cholesky factor of Σ.
pub fn sample_mvn_cov<R: Rng + ?Sized>(
    mean: &DVector<f64>,
    cov_chol: &Chol,
    rng: &mut R,
) -> DVector<f64> {
    let z = standard_normal_vector(mean.len(), rng);
    mean + cov_chol.l_dirty().lower_triangle() * z
}

/// Draw from N(Q⁻¹b, Q⁻¹) given the Cholesky factor of the precision Q.
/// Returns (draw, mean).
pub fn sample_mvn_canonical<R: Rng + ?Sized>(
    b: &DVector<f64>,
    precision_chol: &Chol,
    rng: &mut R,
) -> (DVector<f64>, DVector<f64>) {
    let mean = precision_chol.solve(b);
    let z = standard_normal_vector(b.len(), rng);
    // Lᵀ x = z gives x ~ N(0, Q⁻¹).
    let lt = precision_chol.l_dirty().lower_triangle().transpose();
    let x = lt
        .solve_upper_triangular(&z)
        .expect("Cholesky factor has a positive diagonal");
    (&mean + x, mean)
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Square root of a symmetric positive semi-definite matrix with negative
/// eigenvalues floored at zero: returns S with S Sᵀ = floor(Σ).
pub fn psd_sqrt(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let mut c = cov.clone();
    symmetrize(&mut c);
    let eig = SymmetricEigen::new(c);
    let mut s = eig.eigenvectors;
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let root = lambda.max(0.0).sqrt();
        for i in 0..s.nrows() {
            s[(i, j)] *= root;
        }
    }
    s
}

/// Moore-Penrose inverse of a symmetric matrix; eigenvalues below
/// `rtol * max|λ|` are treated as zero.
pub fn pinv_symmetric(m: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let mut c = m.clone();
    symmetrize(&mut c);
    let eig = SymmetricEigen::new(c);
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let cutoff = rtol * max;
    let n = m.nrows();
    let mut out = DMatrix::zeros(n, n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() > cutoff && lambda != 0.0 {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / lambda;
        }
    }
    out
}

/// Numerical rank of a symmetric matrix.
pub fn symmetric_rank(m: &DMatrix<f64>, rtol: f64) -> usize {
    let mut c = m.clone();
    symmetrize(&mut c);
    let eig = SymmetricEigen::new(c);
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    eig.eigenvalues
        .iter()
        .filter(|l| l.abs() > rtol * max && max > 0.0)
        .count()
}
