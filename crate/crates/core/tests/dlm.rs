mod common;

use bayescase_core::dlm::*;
use bayescase_core::mcmc::{summarize_draws, ChainRng, ChainSpec};
use bayescase_core::special::expit;
use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn prior(p: usize, m0: f64, c0: f64) -> (DVector<f64>, DMatrix<f64>) {
    (DVector::from_element(p, m0), DMatrix::identity(p, p) * c0)
}

#[test]
fn companion_eigenvalues_are_polynomial_roots() {
    // z² − 0.5z − 0.24 = (z − 0.8)(z + 0.3)
    let g = build_companion(&[0.5, 0.24]);
    for root in [0.8, -0.3] {
        let det = (&g - DMatrix::identity(2, 2) * root).determinant();
        assert!(det.abs() < 1e-12, "root {root}: det {det}");
    }
    // (z − 0.5)(z + 0.4)(z − 0.2) = z³ − 0.3z² − 0.18z + 0.04
    let g = build_companion(&[0.3, 0.18, -0.04]);
    for root in [0.5, -0.4, 0.2] {
        let det = (&g - DMatrix::identity(3, 3) * root).determinant();
        assert!(det.abs() < 1e-12, "root {root}: det {det}");
    }
    let det = (&g - DMatrix::identity(3, 3) * 0.7).determinant();
    assert!(det.abs() > 1e-3);
}

#[test]
fn log_likelihood_matches_dense_gaussian() {
    let cases: [(&[f64], &[f64]); 3] = [
        (&[0.7], &[0.3, -0.1, 0.4, 0.9]),
        (&[0.5, 0.24], &[0.2, 0.5, -0.3, 0.1, 0.8, 0.0]),
        (&[0.3, 0.18, -0.04], &[1.0, 0.4, 0.6, -0.2, 0.3]),
    ];
    for (phi, y) in cases {
        let p = phi.len();
        let obs_var: Vec<f64> = (0..y.len()).map(|t| 0.05 + 0.1 * (t % 2) as f64).collect();
        let (m0, c0) = prior(p, 0.2, 0.7);
        let cache = kalman_forward(y, &obs_var, phi, 0.4, &m0, &c0).unwrap();
        let dense = dense_dlm(y, &obs_var, phi, 0.4, &m0, &c0);
        assert!((cache.log_likelihood - dense.log_likelihood).abs() < 1e-8);
        // Filtered mean of x_T equals the smoothed mean of the last coordinate.
        let last = p + y.len() - 1;
        assert!((cache.m[y.len()][0] - dense.post_mean[last]).abs() < 1e-10);
        assert!((cache.c[y.len()][(0, 0)] - dense.post_cov[(last, last)]).abs() < 1e-10);
    }
}

#[test]
fn ffbs_matches_dense_posterior() {
    let y = [0.4, -0.2, 0.9, 0.3];
    let obs_var = [0.2, 0.2, 1.1, 0.2];
    let phi = [0.8];
    let (m0, c0) = prior(1, 0.0, 1.0);
    let cache = kalman_forward(&y, &obs_var, &phi, 0.3, &m0, &c0).unwrap();
    let dense = dense_dlm(&y, &obs_var, &phi, 0.3, &m0, &c0);
    let mut rng = ChainRng::seed_from_u64(41);
    let n = 100_000;
    let dim = 5;
    let mut sum = DVector::zeros(dim);
    let mut sq = DMatrix::zeros(dim, dim);
    for _ in 0..n {
        let d = backward_sample(&cache, &mut rng);
        assert_eq!(d.pinv_fallbacks, 0);
        let v = DVector::from_iterator(dim, d.states.iter().map(|s| s[0])) - &dense.post_mean;
        sum += &v;
        sq += &v * v.transpose();
    }
    let mean = sum / n as f64;
    let cov = sq / n as f64;
    let c = &dense.post_cov;
    for i in 0..dim {
        let se = (c[(i, i)] / n as f64).sqrt();
        assert!(mean[i].abs() < 3.0 * se, "mean {i}: {} (se {se})", mean[i]);
        for j in 0..dim {
            let se = ((c[(i, i)] * c[(j, j)] + c[(i, j)].powi(2)) / n as f64).sqrt();
            assert!((cov[(i, j)] - c[(i, j)]).abs() < 3.0 * se, "cov ({i},{j})");
        }
    }
}

#[test]
fn ffbs_two_lag_states_are_shifted_copies() {
    let y = [0.4, -0.2, 0.9, 0.3, 0.1];
    let (m0, c0) = prior(2, 0.0, 1.0);
    let cache = kalman_forward(&y, &[0.1; 5], &[0.5, 0.2], 0.3, &m0, &c0).unwrap();
    let mut rng = ChainRng::seed_from_u64(2);
    let d = backward_sample(&cache, &mut rng);
    for t in 1..d.states.len() {
        assert!((d.states[t][1] - d.states[t - 1][0]).abs() < 1e-8);
    }
}

#[test]
fn static_level_limit() {
    // φ = 1, ω = 0: a constant level observed with noise.
    let y = [1.0, 1.4, 0.7, 1.2, 0.9, 1.3];
    let v = 0.5;
    let (m0, c0) = prior(1, 0.0, 2.0);
    let cache = kalman_forward(&y, &[v; 6], &[1.0], 0.0, &m0, &c0).unwrap();
    let prec = 1.0 / 2.0 + 6.0 / v;
    let mean = (y.iter().sum::<f64>() / v) / prec;
    assert!((cache.m[6][0] - mean).abs() < 1e-12);
    assert!((cache.c[6][(0, 0)] - 1.0 / prec).abs() < 1e-12);
}

#[test]
fn single_observation() {
    let (m0, c0) = prior(1, 0.5, 2.0);
    let cache = kalman_forward(&[1.7], &[0.3], &[0.6], 0.25, &m0, &c0).unwrap();
    let f = 0.3;
    let q = 0.36 * 2.0 + 0.25 + 0.3;
    assert!((cache.f[0] - f).abs() < 1e-15);
    assert!((cache.q[0] - q).abs() < 1e-15);
    assert!((cache.log_likelihood - ln_normal(1.7, f, q)).abs() < 1e-13);
    let r = 0.36 * 2.0 + 0.25;
    assert!((cache.m[1][0] - (f + r / q * (1.7 - f))).abs() < 1e-13);
}

#[test]
fn gamma_odds_match_integrated_mixture() {
    let spec = OutlierDlmSpec::with_defaults(1, 0.01);
    let mut rng = ChainRng::seed_from_u64(7);
    let (v0, a) = (spec.obs_var_base, spec.outlier_var_add);
    for _ in 0..20 {
        let r: f64 = rng.random_range(-1.5..1.5);
        // ∫ N(r; α, v0) N(α; 0, A) dα by the trapezoid rule.
        let h = 1e-4;
        let lim = 8.0 * a.sqrt() + r.abs();
        let steps = (2.0 * lim / h) as usize;
        let mut integral = 0.0;
        for k in 0..=steps {
            let al = -lim + k as f64 * h;
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            integral += w * (ln_normal(r, al, v0) + ln_normal(al, 0.0, a)).exp();
        }
        integral *= h;
        let num = spec.outlier_prob * integral;
        let den = num + (1.0 - spec.outlier_prob) * ln_normal(r, 0.0, v0).exp();
        let got = expit(gamma_log_odds(&spec, 0.0, r));
        assert!((got - num / den).abs() < 1e-7, "r {r}: {got} vs {}", num / den);
    }
}

#[test]
fn gamma_odds_closed_form() {
    // Default spec: Pr(γ=1)/Pr(γ=0) = (0.2/0.8) N(r; 0, 0.11) / N(r; 0, 0.01).
    let spec = OutlierDlmSpec::with_defaults(2, 0.1);
    let mut rng = ChainRng::seed_from_u64(8);
    for _ in 0..20 {
        let x: f64 = rng.random_range(-2.0..2.0);
        let r: f64 = rng.random_range(-1.0..1.0);
        let want = 0.25 * (ln_normal(r, 0.0, 0.11) - ln_normal(r, 0.0, 0.01)).exp();
        let got = gamma_log_odds(&spec, x, x + r).exp();
        assert!((got / want - 1.0).abs() < 1e-10, "r {r}: {got} vs {want}");
    }
}

#[test]
fn full_conditionals_pass_grid_ratio() {
    for (label, e) in grid::dlm() {
        assert!(e < 1e-8, "{label}: ratio mismatch {e:e}");
    }
}

#[test]
fn ar_direct_recovers_coefficients() {
    let truth = [0.3, 0.1, 0.2];
    let mut rng = ChainRng::seed_from_u64(600);
    let y = synth_ar(&truth, 0.01, 600, &mut rng).unwrap();
    let fit = ar_fit_direct(&y, 3, 4000, &mut rng).unwrap();
    for (j, &t) in truth.iter().enumerate() {
        let d: Vec<f64> = fit.phi_draws.iter().map(|v| v[j]).collect();
        let s = summarize_draws(&d).unwrap();
        assert!(s.q025 < t && t < s.q975, "phi{j}: [{}, {}]", s.q025, s.q975);
        assert!((s.mean - fit.phi_hat_mle[j]).abs() < 0.01);
    }
    let v = summarize_draws(&fit.v_draws).unwrap();
    assert!(v.q025 < 0.01 && 0.01 < v.q975);
    // Posterior mean of υ is RSS / (n − p − 2).
    let expected = fit.rss / (fit.n - 3 - 2) as f64;
    assert!((v.mean - expected).abs() < 0.03 * expected);
}

#[test]
fn no_outlier_prior_reduces_to_plain_ar() {
    let mut rng = ChainRng::seed_from_u64(77);
    let y = synth_ar(&[0.6], 1.0, 400, &mut rng).unwrap();
    let direct = ar_fit_direct(&y, 1, 4000, &mut rng).unwrap();
    let d: Vec<f64> = direct.phi_draws.iter().map(|v| v[0]).collect();
    let d = summarize_draws(&d).unwrap();
    let spec = OutlierDlmSpec {
        outlier_prob: 0.0,
        b_phi: 100.0,
        ..OutlierDlmSpec::with_defaults(1, direct.v_hat_mle)
    };
    let fit = fit_outlier_dlm(&y, &spec, &ChainSpec::new(3000, 500, 1, 5).unwrap()).unwrap();
    assert!(fit.prob_outlier.iter().all(|&p| p == 0.0));
    let s = summarize_draws(fit.phi[0].draws()).unwrap();
    assert!((s.mean - d.mean).abs() < 0.03, "{} vs {}", s.mean, d.mean);
    assert!((s.sd / d.sd - 1.0).abs() < 0.3, "{} vs {}", s.sd, d.sd);
}

#[test]
fn single_large_outlier_is_flagged() {
    let mut rng = ChainRng::seed_from_u64(8);
    let mut y = synth_ar(&[0.5], 0.01, 150, &mut rng).unwrap();
    y[69] += 1.2;
    let spec = OutlierDlmSpec::with_defaults(1, 0.01);
    let chain = ChainSpec::new(1500, 500, 1, 9).unwrap();
    let fit = fit_outlier_dlm(&y, &spec, &chain).unwrap();
    assert!(fit.flagged(0.5).contains(&70));
    assert!(fit.prob_outlier[69] > 0.9);
    assert!((fit.alpha_mean[69] - 1.2).abs() < 0.4);
    let again = fit_outlier_dlm(&y, &spec, &chain).unwrap();
    assert_eq!(fit, again);
}

#[test]
fn rejects_short_and_invalid_input() {
    let spec = OutlierDlmSpec::with_defaults(1, 0.01);
    let chain = ChainSpec::new(10, 0, 1, 1).unwrap();
    assert!(fit_outlier_dlm(&[0.1; 5], &spec, &chain).is_err());
    let bad = OutlierDlmSpec { outlier_prob: 1.0, ..spec };
    assert!(fit_outlier_dlm(&[0.1; 20], &bad, &chain).is_err());
    let (m0, c0) = prior(1, 0.0, 0.0);
    assert!(kalman_forward(&[1.0], &[0.0], &[0.5], 0.0, &m0, &c0).is_err());
}

proptest! {
    #[test]
    fn filtered_covariances_stay_psd(
        phi in proptest::collection::vec(-0.6f64..0.6, 1..4),
        omega in 0.0f64..2.0,
        v in 1e-4f64..1.0,
        y in proptest::collection::vec(-3.0f64..3.0, 1..40),
    ) {
        let p = phi.len();
        let (m0, c0) = prior(p, 0.0, 1.0);
        let cache = kalman_forward(&y, &vec![v; y.len()], &phi, omega, &m0, &c0).unwrap();
        for c in &cache.c {
            let e = c.clone().symmetric_eigenvalues();
            prop_assert!(e.min() > -1e-10);
        }
        prop_assert!(cache.q.iter().all(|&q| q > 0.0));
    }
}
