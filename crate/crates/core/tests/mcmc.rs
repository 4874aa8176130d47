use bayescase_core::mcmc::*;
use bayescase_core::random::standard_normal;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

/// Plain Metropolis on the real line with a Gaussian proposal of sd `step`.
fn reference_rwm_rate(step: f64, n: usize, seed: u64) -> f64 {
    let mut rng = ChainRng::seed_from_u64(seed);
    let (mut x, mut accepted) = (0.0f64, 0usize);
    for _ in 0..n {
        let y = x + step * standard_normal(&mut rng);
        let log_ratio = -0.5 * y * y + 0.5 * x * x;
        if rng.random::<f64>().ln() < log_ratio {
            x = y;
            accepted += 1;
        }
    }
    accepted as f64 / n as f64
}

#[test]
fn transform_fixed_points() {
    let cases = [
        (BoundedTransform::LogLower(0.0), 1.0),
        (BoundedTransform::LogitInterval(0.1, 10.0), 5.05),
        (BoundedTransform::LogShifted(0.5), 0.5),
    ];
    for (t, x) in cases {
        let (eta, jac) = t.apply(x).unwrap();
        assert!(eta.abs() < 1e-12, "{t:?}");
        assert!(jac.is_finite());
    }
    assert!(BoundedTransform::LogLower(0.0).apply(0.0).is_err());
    assert!(BoundedTransform::LogitInterval(0.1, 10.0).apply(10.0).is_err());
    assert!(BoundedTransform::LogShifted(0.5).apply(-0.6).is_err());
}

#[test]
fn round_trip_on_interior_grid() {
    let cases = [
        (BoundedTransform::LogLower(-2.0), -2.0, 50.0),
        (BoundedTransform::LogitInterval(0.1, 10.0), 0.1, 10.0),
        (BoundedTransform::LogShifted(0.3), -0.3, 800.0),
        (BoundedTransform::Identity, -40.0, 40.0),
    ];
    for (t, lo, hi) in cases {
        for k in 1..=100 {
            let x = lo + (hi - lo) * k as f64 / 101.0;
            let back = t.inverse(t.forward(x).unwrap());
            assert!((back - x).abs() <= 1e-12 * x.abs().max(1.0), "{t:?} at {x}");
        }
    }
}

#[test]
fn standard_normal_acceptance_near_optimum() {
    let mut k = RwmKernel::new(BoundedTransform::Identity, 2.4).unwrap();
    let mut rng = ChainRng::seed_from_u64(21);
    let mut x = 0.0;
    for _ in 0..200_000 {
        x = k.update(x, |v| -0.5 * v * v, &mut rng).unwrap();
    }
    let ours = k.acceptance_rate();
    let reference = reference_rwm_rate(2.4, 200_000, 22);
    assert!((ours - 0.44).abs() < 0.05, "kernel rate {ours}");
    assert!((reference - 0.44).abs() < 0.05, "reference rate {reference}");
    assert!((ours - reference).abs() < 0.01);
}

#[test]
fn flat_and_tiny_steps_accept() {
    let mut rng = ChainRng::seed_from_u64(23);
    let mut flat = RwmKernel::new(BoundedTransform::LogLower(0.0), 3.0).unwrap();
    let mut x = 1.0;
    for _ in 0..1000 {
        // A flat density on the η line is θ⁻¹ on the original scale.
        x = flat.update(x, |v| -v.ln(), &mut rng).unwrap();
    }
    assert_eq!(flat.acceptance_rate(), 1.0);
    let mut tiny = RwmKernel::new(BoundedTransform::Identity, 1e-6).unwrap();
    let mut y = 0.3;
    for _ in 0..1000 {
        y = tiny.update(y, |v| -0.5 * v * v, &mut rng).unwrap();
    }
    assert!(tiny.acceptance_rate() > 0.99);
}

#[test]
fn lognormal_target_through_log_transform() {
    // Target on θ > 0: log-normal(0, 1). Its log is N(0, 1) on η.
    let mut k = RwmKernel::new(BoundedTransform::LogLower(0.0), 2.0).unwrap();
    let mut rng = ChainRng::seed_from_u64(24);
    let mut x = 1.0f64;
    let mut logs = Vec::new();
    for _ in 0..100_000 {
        x = k
            .update(x, |v| -v.ln() - 0.5 * v.ln() * v.ln(), &mut rng)
            .unwrap();
        logs.push(x.ln());
    }
    let s = summarize_draws(&logs).unwrap();
    assert!(s.mean.abs() < 0.05 && (s.sd - 1.0).abs() < 0.05, "{s:?}");
}

#[test]
fn non_finite_current_target_is_an_error() {
    let mut k = RwmKernel::new(BoundedTransform::Identity, 1.0).unwrap();
    let mut rng = ChainRng::seed_from_u64(25);
    assert!(k.update(0.0, |_| f64::NAN, &mut rng).is_err());
}

#[test]
fn ess_examples() {
    let mut rng = ChainRng::seed_from_u64(26);
    let iid: Vec<f64> = (0..10_000).map(|_| standard_normal(&mut rng)).collect();
    let e = effective_sample_size(&iid);
    assert!((9000.0..=11000.0).contains(&e), "{e}");
    let rho = 0.5f64;
    let mut ar = vec![standard_normal(&mut rng)];
    for _ in 1..20_000 {
        let last = *ar.last().unwrap();
        ar.push(rho * last + (1.0 - rho * rho).sqrt() * standard_normal(&mut rng));
    }
    let want = 20_000.0 * (1.0 - rho) / (1.0 + rho);
    let e = effective_sample_size(&ar);
    assert!((e / want - 1.0).abs() < 0.15, "{e} vs {want}");
    assert_eq!(effective_sample_size(&[2.0; 50]), 50.0);
}

#[test]
fn summary_examples() {
    let s = summarize_draws(&[1.0; 4]).unwrap();
    assert_eq!((s.mean, s.sd, s.q025, s.q50, s.q975), (1.0, 0.0, 1.0, 1.0, 1.0));
    let s = summarize_draws(&[0.0, 1.0]).unwrap();
    assert_eq!((s.mean, s.q50), (0.5, 0.5));
    let mut rng = ChainRng::seed_from_u64(27);
    let u: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
    let s = summarize_draws(&u).unwrap();
    assert!((s.q025 - 0.025).abs() < 0.005);
    assert!(summarize_draws(&[1.0]).is_err());
}

#[test]
fn chain_spec_bookkeeping() {
    let spec = ChainSpec::new(6000, 1000, 50, 1).unwrap();
    assert_eq!(spec.retained(), 100);
    let kept = (1..=6000).filter(|&i| spec.is_retained(i)).count();
    assert_eq!(kept, 100);
    assert!(ChainSpec::new(100, 100, 1, 1).is_err());
    assert!(ChainSpec::new(100, 10, 0, 1).is_err());
    assert!(ChainSpec::new(100, 10, 200, 1).is_err());
}

#[test]
fn same_seed_same_stream() {
    let a = ChainSpec::new(10, 0, 1, 99).unwrap();
    let (mut r1, mut r2) = (a.rng(), a.rng());
    let x: Vec<u64> = (0..20).map(|_| r1.random()).collect();
    let y: Vec<u64> = (0..20).map(|_| r2.random()).collect();
    assert_eq!(x, y);
    let mut r3 = a.with_stream(1).rng();
    let z: Vec<u64> = (0..20).map(|_| r3.random()).collect();
    assert_ne!(x, z);
}

#[test]
fn split_rhat_flags_disagreement() {
    let mut rng = ChainRng::seed_from_u64(28);
    let a: Vec<f64> = (0..2000).map(|_| standard_normal(&mut rng)).collect();
    let b: Vec<f64> = (0..2000).map(|_| standard_normal(&mut rng)).collect();
    let c: Vec<f64> = (0..2000).map(|_| 3.0 + standard_normal(&mut rng)).collect();
    assert!(split_rhat(&[&a, &b]).unwrap() < 1.01);
    assert!(split_rhat(&[&a, &c]).unwrap() > 1.5);
}

proptest! {
    #[test]
    fn summary_permutation_invariant(mut v in proptest::collection::vec(-1e3f64..1e3, 2..200), seed in any::<u64>()) {
        let a = summarize_draws(&v).unwrap();
        let mut rng = ChainRng::seed_from_u64(seed);
        for i in (1..v.len()).rev() {
            v.swap(i, rng.random_range(0..=i));
        }
        let b = summarize_draws(&v).unwrap();
        let tol = 1e-9 * (1.0 + a.mean.abs() + a.sd);
        prop_assert!((a.mean - b.mean).abs() < tol);
        prop_assert!((a.sd - b.sd).abs() < tol);
        prop_assert_eq!((a.q025, a.q50, a.q975), (b.q025, b.q50, b.q975));
        prop_assert!(a.q025 <= a.q50 && a.q50 <= a.q975);
        prop_assert!(a.sd >= 0.0 && a.ess <= v.len() as f64 * 1.05 && a.ess > 0.0);
    }

    #[test]
    fn logit_round_trip(a in -50.0f64..50.0, width in 1e-3f64..100.0, u in 0.001f64..0.999) {
        let t = BoundedTransform::LogitInterval(a, a + width);
        let x = a + u * width;
        let back = t.inverse(t.forward(x).unwrap());
        prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(1.0) + 1e-12 * width);
        prop_assert!(t.log_jacobian(t.forward(x).unwrap()).is_finite());
    }

    #[test]
    fn acceptance_rate_in_unit_interval(step in 0.01f64..20.0, seed in any::<u64>()) {
        let mut k = RwmKernel::new(BoundedTransform::Identity, step).unwrap();
        let mut rng = ChainRng::seed_from_u64(seed);
        let mut x = 0.0;
        for _ in 0..200 {
            x = k.update(x, |v| -0.5 * v * v, &mut rng).unwrap();
        }
        let r = k.acceptance_rate();
        prop_assert!((0.0..=1.0).contains(&r));
        prop_assert_eq!(k.propose_count, 200);
    }
}
