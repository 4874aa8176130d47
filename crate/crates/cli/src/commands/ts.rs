use std::path::PathBuf;

use bayescase_core::dlm::{ar_fit_direct, fit_outlier_dlm, OutlierDlmSpec};
use bayescase_core::mcmc::ChainRng;
use bayescase_core::Trace;
use rand::SeedableRng;
use serde_json::json;

use super::required;
use crate::cli::{ArFitArgs, DlmFitArgs, RunArgs};
use crate::error::{invalid, CliResult};
use crate::io::{num, read_table, write_csv};
use crate::output::{summarize_chains, write_traces, ChainDefaults, Manifest, Run};

/// A `t,y` series; `t` must be strictly increasing.
struct Series {
    t: Vec<String>,
    y: Vec<f64>,
}

fn read_series(input: &Option<PathBuf>) -> CliResult<Series> {
    let path = required(input, "input")?;
    let table = read_table(&path, "input")?;
    table.require_headers(&["t", "y"])?;
    let times = table.column(0)?;
    if let Some(w) = times.windows(2).position(|w| w[1] <= w[0]) {
        return Err(invalid!(
            "input {}: t must be strictly increasing (line {})",
            path.display(),
            w + 3
        ));
    }
    let t = (0..table.len())
        .map(|r| table.text(r, 0).map(str::to_string))
        .collect::<CliResult<_>>()?;
    Ok(Series { t, y: table.column(1)? })
}

pub fn ar_fit(name: &str, (run, mut args): (RunArgs, ArFitArgs)) -> CliResult<()> {
    let series = read_series(&args.input)?;
    let p = *args.p.get_or_insert(3);
    let draws = *args.draws.get_or_insert(25_000);
    // Direct draws are independent, so there is no burn-in or thinning by
    // default; `--draws` only sets the default length.
    let run = Run::new(run, ChainDefaults { iterations: draws, burn_in: 0, thin: 1 })?;
    let fits = run.run_chains(|spec| {
        // Draw the full run length and keep the retained positions so the
        // chain settings behave as for the samplers.
        let mut rng = spec.rng();
        let fit = ar_fit_direct(&series.y, p, spec.total_iterations, &mut rng)?;
        let mut traces: Vec<Trace> = (1..=p).map(|j| Trace::new(format!("phi{j}"))).collect();
        let mut v = Trace::new("v");
        for it in 1..=spec.total_iterations {
            if spec.is_retained(it) {
                for (tr, &x) in traces.iter_mut().zip(fit.phi_draws[it - 1].iter()) {
                    tr.push(x);
                }
                v.push(fit.v_draws[it - 1]);
            }
        }
        traces.push(v);
        Ok((fit.phi_hat_mle.as_slice().to_vec(), fit.v_hat_mle, traces))
    })?;
    let (phi_hat, v_hat, _) = &fits[0];
    let traces: Vec<Vec<Trace>> = fits.iter().map(|f| f.2.clone()).collect();
    let outputs = write_traces(&run, &traces)?;
    let mut manifest = Manifest::new(name, &run, &args);
    manifest.parameters = summarize_chains(&traces)?;
    manifest.diagnostics.insert("phi_hat_mle".into(), json!(phi_hat));
    manifest.diagnostics.insert("v_hat_mle".into(), json!(v_hat));
    manifest.outputs = outputs;
    manifest.write(&run)
}

pub fn dlm_fit(name: &str, (run, mut args): (RunArgs, DlmFitArgs)) -> CliResult<()> {
    let series = read_series(&args.input)?;
    let p = *args.p.get_or_insert(3);
    let b_omega = match args.b_omega {
        Some(b) => b,
        None => {
            // Least-squares innovation variance; no draws are taken.
            let ar = ar_fit_direct(&series.y, p, 0, &mut ChainRng::seed_from_u64(0))?;
            if ar.v_hat_mle.is_nan() || ar.v_hat_mle <= 0.0 {
                return Err(invalid!("b-omega: least-squares variance is zero; set it explicitly"));
            }
            ar.v_hat_mle
        }
    };
    args.b_omega = Some(b_omega);
    let d = OutlierDlmSpec::with_defaults(p, b_omega);
    let spec = OutlierDlmSpec {
        p,
        outlier_prob: *args.outlier_prob.get_or_insert(d.outlier_prob),
        obs_var_base: *args.obs_var.get_or_insert(d.obs_var_base),
        outlier_var_add: *args.outlier_var.get_or_insert(d.outlier_var_add),
        a_phi: *args.a_phi.get_or_insert(d.a_phi),
        b_phi: *args.b_phi.get_or_insert(d.b_phi),
        a_omega: *args.a_omega.get_or_insert(d.a_omega),
        b_omega,
        m0: *args.m0.get_or_insert(d.m0),
        c0: *args.c0.get_or_insert(d.c0),
    };
    spec.validate()?;
    let run = Run::new(run, ChainDefaults { iterations: 30_000, burn_in: 5_000, thin: 1 })?;
    let fits = run.run_chains(|chain| Ok(fit_outlier_dlm(&series.y, &spec, &chain)?))?;

    let traces: Vec<Vec<Trace>> = fits
        .iter()
        .map(|f| {
            let mut v = f.phi.clone();
            v.push(f.omega.clone());
            v
        })
        .collect();
    let mut outputs = write_traces(&run, &traces)?;

    let m = fits.len() as f64;
    let avg = |get: fn(&bayescase_core::dlm::OutlierDlmFit) -> &Vec<f64>, t: usize| {
        fits.iter().map(|f| get(f)[t]).sum::<f64>() / m
    };
    let t_len = series.y.len();
    let prob: Vec<f64> = (0..t_len).map(|t| avg(|f| &f.prob_outlier, t)).collect();
    write_csv(
        &run.path("outliers.csv"),
        &["t", "prob_outlier", "alpha_mean"],
        (0..t_len).map(|t| {
            vec![series.t[t].clone(), num(prob[t]), num(avg(|f| &f.alpha_mean, t))]
        }),
    )?;
    write_csv(
        &run.path("fit.csv"),
        &["t", "x_mean", "fitted_mean"],
        (0..t_len).map(|t| {
            vec![
                series.t[t].clone(),
                num(avg(|f| &f.x_mean, t)),
                num(avg(|f| &f.fitted_mean, t)),
            ]
        }),
    )?;
    outputs.push("outliers.csv".into());
    outputs.push("fit.csv".into());

    let mut manifest = Manifest::new(name, &run, &args);
    manifest.parameters = summarize_chains(&traces)?;
    let flagged: Vec<&str> = (0..t_len)
        .filter(|&t| prob[t] > 0.5)
        .map(|t| series.t[t].as_str())
        .collect();
    manifest.diagnostics.insert("flagged_t".into(), json!(flagged));
    manifest.diagnostics.insert(
        "pinv_fallbacks".into(),
        json!(fits.iter().map(|f| f.pinv_fallbacks).sum::<usize>()),
    );
    manifest.outputs = outputs;
    manifest.write(&run)
}
