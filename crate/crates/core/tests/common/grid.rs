//! Grid-ratio checks on miniature instances of the three Gibbs models.
//! Each returns (label, |conditional ratio − joint ratio|) per block.

use super::*;
use bayescase_core::dlm::{self, *};
use bayescase_core::gp::{self, *};
use bayescase_core::spatial::{self, *};

fn err(cond: (f64, f64), joint: (f64, f64)) -> f64 {
    ((cond.0 - cond.1) - (joint.0 - joint.1)).abs()
}

pub fn gp_case() -> (GpData, GpHyper, GpState) {
    let x = vec![-1.2, -0.3, 0.4, 1.1, 2.5];
    let y = vec![0.8, 1.3, 1.1, 0.7, 0.2];
    let data = GpData::new(x, y).unwrap();
    let hyper = empirical_bayes(&data, 1.0).unwrap();
    let state = GpState {
        theta: DVector::from_vec(vec![0.7, 1.2, 1.0, 0.8, 0.3]),
        sigma2: 0.05,
        mu: 0.9,
        tau2: 0.4,
        phi: 0.8,
    };
    (data, hyper, state)
}

pub fn gp() -> Vec<(String, f64)> {
    let (data, hyper, s) = gp_case();
    let j = |st: &GpState| gp_log_joint(data.x(), data.y(), &hyper, st);
    let factor = CorrFactor::new(data.x(), s.phi, 1.0).unwrap();
    let mut out = Vec::new();

    let (mean, cov) = gp::theta_conditional(&s, &data, &factor).unwrap();
    let shift = DVector::from_vec(vec![1.0, -1.0, 2.0, 0.5, 1.0]);
    let o = GpState { theta: s.theta.add_scalar(0.15).component_mul(&shift), ..s.clone() };
    out.push((
        "theta".into(),
        err((ln_mvn(&o.theta, &mean, &cov), ln_mvn(&s.theta, &mean, &cov)), (j(&o), j(&s))),
    ));

    let c = sigma2_conditional(&s, &data, &hyper).unwrap();
    let o = GpState { sigma2: 0.21, ..s.clone() };
    out.push(("sigma2".into(), err((c.ln_pdf(0.21), c.ln_pdf(s.sigma2)), (j(&o), j(&s)))));

    let c = mu_conditional(&s, &hyper, &factor);
    let o = GpState { mu: -0.4, ..s.clone() };
    out.push(("mu".into(), err((c.ln_pdf(-0.4), c.ln_pdf(s.mu)), (j(&o), j(&s)))));

    let c = tau2_conditional(&s, &hyper, &factor).unwrap();
    let o = GpState { tau2: 1.3, ..s.clone() };
    out.push(("tau2".into(), err((c.ln_pdf(1.3), c.ln_pdf(s.tau2)), (j(&o), j(&s)))));

    let o = GpState { phi: 3.7, ..s.clone() };
    let f2 = CorrFactor::new(data.x(), 3.7, 1.0).unwrap();
    out.push((
        "phi".into(),
        err((phi_log_target(&o, &f2), phi_log_target(&s, &factor)), (j(&o), j(&s))),
    ));
    out
}

pub fn dlm() -> Vec<(String, f64)> {
    let y = vec![0.3, 0.9, -0.1, 0.2, 0.4];
    let spec = OutlierDlmSpec { b_phi: 0.5, ..OutlierDlmSpec::with_defaults(2, 0.02) };
    let theta: Vec<DVector<f64>> = [0.1, -0.2, 0.25, 0.5, 0.05, 0.15, 0.3]
        .windows(2)
        .map(|w| DVector::from_vec(vec![w[1], w[0]]))
        .collect();
    let s = DlmState {
        gamma: vec![false, true, false, false, true],
        alpha: vec![0.05, 0.6, -0.1, 0.02, 0.2],
        theta,
        phi: DVector::from_vec(vec![0.4, 0.2]),
        omega: 0.05,
    };
    let joint = |st: &DlmState, with_alpha: bool| {
        let a = if with_alpha { Some(st.alpha.as_slice()) } else { None };
        dlm_log_joint(&y, &spec, &st.gamma, a, &st.theta, &st.phi, st.omega)
    };
    let mut out = Vec::new();

    for t in [0usize, 1] {
        let c = alpha_conditional(&spec, s.theta[t + 1][0], s.gamma[t], y[t]);
        let mut o = s.clone();
        o.alpha[t] = -0.35;
        out.push((
            format!("alpha[{t}]"),
            err((c.ln_pdf(-0.35), c.ln_pdf(s.alpha[t])), (joint(&o, true), joint(&s, true))),
        ));
    }

    // γ_t with α_t integrated out.
    for (t, &y_t) in y.iter().enumerate() {
        let lo = gamma_log_odds(&spec, s.theta[t + 1][0], y_t);
        let (mut on, mut off) = (s.clone(), s.clone());
        on.gamma[t] = true;
        off.gamma[t] = false;
        out.push((format!("gamma[{t}]"), err((lo, 0.0), (joint(&on, false), joint(&off, false)))));
    }

    let (prec, b) = dlm::phi_conditional(&s.theta, s.omega, &spec).unwrap();
    let mean = prec.clone().try_inverse().unwrap() * &b;
    let mut o = s.clone();
    o.phi = DVector::from_vec(vec![-0.3, 0.7]);
    out.push((
        "phi".into(),
        err(
            (ln_mvn_precision(&o.phi, &mean, &prec), ln_mvn_precision(&s.phi, &mean, &prec)),
            (joint(&o, true), joint(&s, true)),
        ),
    ));

    let c = omega_conditional(&s.theta, &s.phi, &spec).unwrap();
    let mut o = s.clone();
    o.omega = 0.31;
    out.push(("omega".into(), err((c.ln_pdf(0.31), c.ln_pdf(s.omega)), (joint(&o, true), joint(&s, true)))));
    out
}

pub fn spatial_case() -> (PanelData, Lattice, SpatialHyper, SpatialState) {
    let lat = Lattice::new(4, &[(0, 1), (1, 2), (2, 3)], vec![0, 0, 1, 1], 2, &[(0, 1)]).unwrap();
    let y = DMatrix::from_row_slice(4, 2, &[1, 0, 0, 0, 1, 1, 0, 1]);
    let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.3, 1.0, -1.2, 1.0, 0.8, 1.0, 0.1]);
    let data = PanelData::with_unit_times(y, x).unwrap();
    let hyper = SpatialHyper::with_defaults(lat.units.mean_neighbors()).unwrap();
    let state = SpatialState {
        omega: DMatrix::from_row_slice(4, 2, &[0.4, -0.3, -1.1, -0.2, 0.9, 0.5, -0.6, 1.3]),
        theta: DMatrix::from_row_slice(4, 2, &[0.1, -0.2, 0.05, 0.3, -0.1, 0.0, 0.2, -0.15]),
        phi: DMatrix::from_row_slice(4, 2, &[0.3, -0.1, -0.2, 0.2, 0.1, 0.05, -0.2, -0.15]),
        beta: DVector::from_vec(vec![0.2, 0.7]),
        gamma: DVector::from_vec(vec![-0.3, 0.4]),
        xi: 0.15,
        kappa: DVector::from_vec(vec![0.8, 1.6]),
        tau: DVector::from_vec(vec![2.5, 1.2]),
        lambda: DVector::from_vec(vec![1.7, 0.6]),
    };
    (data, lat, hyper, state)
}

pub fn spatial() -> Vec<(String, f64)> {
    let (data, lat, hyper, s) = spatial_case();
    let j = |st: &SpatialState| spatial_log_joint(&data, &lat, &hyper, st);
    let mut out = Vec::new();

    // ω: each entry is a normal restricted to the side fixed by y.
    let eta = s.predictor(&data, &lat);
    let mut o = s.clone();
    o.omega[(1, 1)] = -2.4;
    let var = 1.0 / s.kappa[1];
    out.push((
        "omega".into(),
        err(
            (ln_normal(-2.4, eta[(1, 1)], var), ln_normal(s.omega[(1, 1)], eta[(1, 1)], var)),
            (j(&o), j(&s)),
        ),
    ));

    let (prec, b) = beta_conditional(&s, &data, &lat, &hyper);
    let mean = prec.clone().try_inverse().unwrap() * b;
    let mut o = s.clone();
    o.beta = DVector::from_vec(vec![-0.9, 1.4]);
    out.push((
        "beta".into(),
        err(
            (ln_mvn_precision(&o.beta, &mean, &prec), ln_mvn_precision(&s.beta, &mean, &prec)),
            (j(&o), j(&s)),
        ),
    ));

    let (prec, b) = gamma_conditional(&s, &data, &lat, &hyper);
    let mean = prec.clone().try_inverse().unwrap() * b;
    let mut o = s.clone();
    o.gamma = DVector::from_vec(vec![0.6, -0.1]);
    out.push((
        "gamma".into(),
        err(
            (ln_mvn_precision(&o.gamma, &mean, &prec), ln_mvn_precision(&s.gamma, &mean, &prec)),
            (j(&o), j(&s)),
        ),
    ));

    let c = xi_conditional(&s, &data, &lat, &hyper);
    let o = SpatialState { xi: -0.45, ..s.clone() };
    out.push(("xi".into(), err((c.ln_pdf(-0.45), c.ln_pdf(s.xi)), (j(&o), j(&s)))));

    for t in 0..2 {
        let (mean, var) = spatial::theta_conditional(&s, &data, &lat, t);
        let mut o = s.clone();
        o.theta.set_column(t, &DVector::from_vec(vec![0.4, -0.3, 0.2, 0.0]));
        let ln = |v: &DMatrix<f64>| (0..4).map(|i| ln_normal(v[(i, t)], mean[i], var)).sum::<f64>();
        out.push((format!("theta[{t}]"), err((ln(&o.theta), ln(&s.theta)), (j(&o), j(&s)))));

        let (prec, b) = spatial::phi_conditional(&s, &data, &lat, t);
        let mean = prec.clone().try_inverse().unwrap() * b;
        let mut o = s.clone();
        let new = DVector::from_vec(vec![-0.5, 0.1, 0.3, 0.2]);
        o.phi.set_column(t, &new);
        let old = s.phi.column(t).into_owned();
        out.push((
            format!("phi[{t}]"),
            err(
                (ln_mvn_precision(&new, &mean, &prec), ln_mvn_precision(&old, &mean, &prec)),
                (j(&o), j(&s)),
            ),
        ));

        let c = kappa_conditional(&s, &data, &lat, &hyper, t).unwrap();
        let mut o = s.clone();
        o.kappa[t] = 2.9;
        out.push((format!("kappa[{t}]"), err((c.ln_pdf(2.9), c.ln_pdf(s.kappa[t])), (j(&o), j(&s)))));

        let c = tau_conditional(&s, &hyper, t).unwrap();
        let mut o = s.clone();
        o.tau[t] = 0.4;
        out.push((format!("tau[{t}]"), err((c.ln_pdf(0.4), c.ln_pdf(s.tau[t])), (j(&o), j(&s)))));

        let c = lambda_conditional(&s, &lat, &hyper, t).unwrap();
        let mut o = s.clone();
        o.lambda[t] = 3.3;
        out.push((format!("lambda[{t}]"), err((c.ln_pdf(3.3), c.ln_pdf(s.lambda[t])), (j(&o), j(&s)))));
    }
    out
}
