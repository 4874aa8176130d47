use bayescase_core::gp::{empirical_bayes, fit_gp, posterior_band, synth_gp_data, GpData, GpOptions};
use bayescase_core::Trace;
use serde_json::json;

use super::{acceptance_entry, required};
use crate::cli::{GpFitArgs, GpSimArgs, RunArgs};
use crate::error::{invalid, CliResult};
use crate::io::{num, read_table, write_csv};
use crate::output::{summarize_chains, write_traces, ChainDefaults, Manifest, Run};

const FIT_DEFAULTS: ChainDefaults = ChainDefaults {
    iterations: 255_000,
    burn_in: 5_000,
    thin: 10,
};

pub fn sim(name: &str, (run, mut args): (RunArgs, GpSimArgs)) -> CliResult<()> {
    let run = Run::new(run, ChainDefaults { iterations: 1, burn_in: 0, thin: 1 })?;
    let n = *args.n.get_or_insert(100);
    let sigma = *args.sigma.get_or_insert(0.2);
    let synth = synth_gp_data(n, sigma, run.seed)?;
    let x = synth.data.x();
    write_csv(
        &run.path("data.csv"),
        &["x", "y"],
        x.iter().zip(synth.data.y()).map(|(a, b)| vec![num(*a), num(*b)]),
    )?;
    write_csv(
        &run.path("truth.csv"),
        &["x", "f"],
        x.iter().zip(&synth.f_true).map(|(a, b)| vec![num(*a), num(*b)]),
    )?;
    let mut manifest = Manifest::new(name, &run, &args);
    manifest.outputs = vec!["data.csv".into(), "truth.csv".into()];
    manifest.write(&run)
}

pub fn read_xy(args: &GpFitArgs) -> CliResult<GpData> {
    let path = required(&args.input, "input")?;
    let table = read_table(&path, "input")?;
    table.require_headers(&["x", "y"])?;
    let data = GpData::new(table.column(0)?, table.column(1)?)
        .map_err(|e| invalid!("input {}: {e}", path.display()))?;
    Ok(data)
}

pub fn fit(name: &str, (run, mut args): (RunArgs, GpFitArgs)) -> CliResult<()> {
    let data = read_xy(&args)?;
    let run = Run::new(run, FIT_DEFAULTS)?;
    let alpha = *args.alpha.get_or_insert(1.0);
    let mut hyper = empirical_bayes(&data, alpha)?;
    hyper.a_sigma = *args.a_sigma.get_or_insert(hyper.a_sigma);
    hyper.b_sigma = *args.b_sigma.get_or_insert(hyper.b_sigma);
    hyper.a_mu = *args.a_mu.get_or_insert(hyper.a_mu);
    hyper.b_mu = *args.b_mu.get_or_insert(hyper.b_mu);
    hyper.a_tau = *args.a_tau.get_or_insert(hyper.a_tau);
    hyper.b_tau = *args.b_tau.get_or_insert(hyper.b_tau);
    hyper.a_phi = *args.a_phi.get_or_insert(hyper.a_phi);
    hyper.b_phi = *args.b_phi.get_or_insert(hyper.b_phi);
    hyper.validate()?;
    let options = GpOptions {
        step: *args.step.get_or_insert(1.0),
        adapt: *args.adapt.get_or_insert(true),
    };

    let fits = run.run_chains(|spec| Ok(fit_gp(&data, &hyper, &spec, options)?))?;
    let traces: Vec<Vec<Trace>> = fits
        .iter()
        .map(|f| vec![f.sigma2.clone(), f.mu.clone(), f.tau2.clone(), f.phi.clone()])
        .collect();
    let mut outputs = write_traces(&run, &traces)?;

    let pooled_theta: Vec<Trace> = (0..data.len())
        .map(|i| Trace::pooled(fits.iter().map(|f| &f.theta[i])).expect("at least one chain"))
        .collect();
    let band = posterior_band(data.x(), &pooled_theta);
    write_csv(
        &run.path("band.csv"),
        &["x", "f_mean", "f_q025", "f_q975"],
        band.iter()
            .map(|b| vec![num(b.x), num(b.f_mean), num(b.f_q025), num(b.f_q975)]),
    )?;
    outputs.push("band.csv".into());

    let mut manifest = Manifest::new(name, &run, &args);
    manifest.parameters = summarize_chains(&traces)?;
    let rates: Vec<f64> = fits.iter().map(|f| f.acceptance_phi).collect();
    manifest.acceptance.insert("phi".into(), acceptance_entry(&rates));
    manifest.diagnostics.insert(
        "final_step_phi".into(),
        json!(fits.iter().map(|f| f.final_step).collect::<Vec<_>>()),
    );
    manifest.diagnostics.insert(
        "max_jitter".into(),
        json!(fits.iter().map(|f| f.max_jitter).fold(0.0, f64::max)),
    );
    manifest.outputs = outputs;
    manifest.write(&run)
}
