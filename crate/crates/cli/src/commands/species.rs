use std::path::Path;

use bayescase_core::species::{
    closed_form_pooled, fit_crp, fit_pyp, predict_new_species_sim, total_variation,
    AbundanceData, CrpPrior, PartitionParams, PypPrior, StirlingTable, Tuning,
};
use bayescase_core::Trace;
use serde_json::json;

use super::acceptance_entry;
use crate::cli::{Method, Process, RunArgs, SpeciesFitArgs, SpeciesPredictArgs};
use crate::error::{invalid, CliResult};
use crate::io::{num, read_table, write_csv};
use crate::output::{summarize_chains, write_traces, ChainDefaults, Manifest, Run};

const DEFAULTS: ChainDefaults = ChainDefaults {
    iterations: 6_000,
    burn_in: 1_000,
    thin: 50,
};

/// Stream for prediction draws, clear of the chain streams.
const PREDICT_STREAM: u64 = 1 << 32;

fn read_abundance(args: &SpeciesFitArgs) -> CliResult<AbundanceData> {
    let Some(path) = &args.input else {
        return Err(invalid!("input: required (a `size,count` CSV or `est`)"));
    };
    if path.as_os_str() == "est" {
        return Ok(AbundanceData::est());
    }
    let table = read_table(path, "input")?;
    table.require_headers(&["size", "count"])?;
    let pairs = (0..table.len())
        .map(|r| Ok((table.count(r, 0)?, table.count(r, 1)?)))
        .collect::<CliResult<Vec<_>>>()?;
    AbundanceData::from_frequencies(&pairs).map_err(|e| invalid!("input {}: {e}", path.display()))
}

/// Posterior draws of the partition parameters, one trace set per chain:
/// `[theta]` for the CRP, `[sigma, theta]` for the Pitman-Yor process.
struct Fitted {
    process: Process,
    traces: Vec<Vec<Trace>>,
    acceptance: serde_json::Map<String, serde_json::Value>,
}

fn run_fit(run: &Run, data: &AbundanceData, args: &mut SpeciesFitArgs) -> CliResult<Fitted> {
    let process = *args.process.get_or_insert(Process::Crp);
    let adapt = *args.adapt.get_or_insert(false);
    let mut acceptance = serde_json::Map::new();
    let traces = match process {
        Process::Crp => {
            let d = CrpPrior::default();
            let prior = CrpPrior {
                a_theta: *args.a_theta.get_or_insert(d.a_theta),
                b_theta: *args.b_theta.get_or_insert(d.b_theta),
            };
            if args.a_sigma.is_some() || args.b_sigma.is_some() || args.step_sigma.is_some() {
                return Err(invalid!("a-sigma, b-sigma and step-sigma apply to --process pyp only"));
            }
            let tuning = Tuning { step: *args.step.get_or_insert(0.1), adapt };
            let fits = run.run_chains(|spec| Ok(fit_crp(data, &prior, &spec, tuning)?))?;
            let rates: Vec<f64> = fits.iter().map(|f| f.acceptance).collect();
            acceptance.insert("theta".into(), acceptance_entry(&rates));
            fits.into_iter().map(|f| vec![f.theta]).collect()
        }
        Process::Pyp => {
            let d = PypPrior::default();
            let prior = PypPrior {
                a_sigma: *args.a_sigma.get_or_insert(d.a_sigma),
                b_sigma: *args.b_sigma.get_or_insert(d.b_sigma),
                a_theta: *args.a_theta.get_or_insert(d.a_theta),
                b_theta: *args.b_theta.get_or_insert(d.b_theta),
            };
            let sigma_tuning = Tuning { step: *args.step_sigma.get_or_insert(0.2), adapt };
            let theta_tuning = Tuning { step: *args.step.get_or_insert(0.2), adapt };
            let fits = run.run_chains(|spec| {
                Ok(fit_pyp(data, &prior, &spec, sigma_tuning, theta_tuning)?)
            })?;
            let sig: Vec<f64> = fits.iter().map(|f| f.acceptance_sigma).collect();
            let th: Vec<f64> = fits.iter().map(|f| f.acceptance_theta).collect();
            acceptance.insert("sigma".into(), acceptance_entry(&sig));
            acceptance.insert("theta".into(), acceptance_entry(&th));
            fits.into_iter().map(|f| vec![f.sigma, f.theta]).collect()
        }
    };
    Ok(Fitted { process, traces, acceptance })
}

pub fn fit(name: &str, (run, mut args): (RunArgs, SpeciesFitArgs)) -> CliResult<()> {
    let data = read_abundance(&args)?;
    let run = Run::new(run, DEFAULTS)?;
    let fitted = run_fit(&run, &data, &mut args)?;
    let outputs = write_traces(&run, &fitted.traces)?;
    let mut manifest = Manifest::new(name, &run, &args);
    manifest.parameters = summarize_chains(&fitted.traces)?;
    manifest.acceptance = fitted.acceptance;
    manifest.diagnostics.insert("n".into(), json!(data.n()));
    manifest.diagnostics.insert("k".into(), json!(data.k()));
    manifest.outputs = outputs;
    manifest.write(&run)
}

/// Draws from a trace CSV written by `species-fit`: a `theta` column and,
/// for the Pitman-Yor process, a `sigma` column.
fn read_trace(path: &Path) -> CliResult<Fitted> {
    let table = read_table(path, "trace")?;
    let col = |name: &str| table.headers.iter().position(|h| h == name);
    let theta_col = col("theta")
        .ok_or_else(|| invalid!("trace {}: no `theta` column", path.display()))?;
    let theta = Trace::from_draws("theta", table.column(theta_col)?)?;
    let (process, traces) = match col("sigma") {
        Some(c) => (Process::Pyp, vec![Trace::from_draws("sigma", table.column(c)?)?, theta]),
        None => (Process::Crp, vec![theta]),
    };
    Ok(Fitted {
        process,
        traces: vec![traces],
        acceptance: serde_json::Map::new(),
    })
}

fn pooled(fitted: &Fitted, j: usize) -> Vec<f64> {
    fitted.traces.iter().flat_map(|c| c[j].draws().iter().copied()).collect()
}

/// Mean, sd and the 2.5% / 97.5% quantiles of a distribution on 0..=n_star.
/// A quantile is the smallest k whose cumulative probability reaches p.
fn distribution_summary(p: &[f64]) -> [f64; 4] {
    let mean: f64 = p.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let var: f64 = p.iter().enumerate().map(|(k, v)| (k as f64 - mean).powi(2) * v).sum();
    let quantile = |q: f64| {
        let mut acc = 0.0;
        for (k, v) in p.iter().enumerate() {
            acc += v;
            if acc >= q - 1e-12 {
                return k as f64;
            }
        }
        (p.len() - 1) as f64
    };
    [mean, var.sqrt(), quantile(0.025), quantile(0.975)]
}

fn write_distribution(run: &Run, file: &str, p: &[f64]) -> CliResult<()> {
    write_csv(
        &run.path(file),
        &["k", "probability"],
        p.iter().enumerate().map(|(k, v)| vec![k.to_string(), num(*v)]),
    )
}

pub fn predict(name: &str, (run, mut args): (RunArgs, SpeciesPredictArgs)) -> CliResult<()> {
    let data = read_abundance(&args.fit)?;
    let n_star = *args.n_star.get_or_insert(50);
    let method = *args.method.get_or_insert(Method::Both);
    let replicates = *args.replicates.get_or_insert(100);
    if replicates == 0 {
        return Err(invalid!("replicates: must be positive"));
    }
    let run = Run::new(run, DEFAULTS)?;
    let fitted = match &args.trace {
        Some(path) => read_trace(path)?,
        None => run_fit(&run, &data, &mut args.fit)?,
    };
    let want_closed = match (method, fitted.process) {
        (Method::Closed, Process::Pyp) => {
            return Err(invalid!("method: the closed form needs the CRP (`--process crp`)"));
        }
        (Method::Both, Process::Pyp) => {
            log::warn!("closed-form prediction needs the CRP; simulating only");
            false
        }
        (Method::Sim, _) => false,
        _ => true,
    };
    let want_sim = method != Method::Closed;

    let theta = pooled(&fitted, fitted.traces[0].len() - 1);
    let sigma = match fitted.process {
        Process::Pyp => pooled(&fitted, 0),
        Process::Crp => vec![0.0; theta.len()],
    };
    let mut outputs = Vec::new();
    if args.trace.is_none() {
        outputs = write_traces(&run, &fitted.traces)?;
    }
    let mut summary_rows = Vec::new();
    let mut manifest = Manifest::new(name, &run, &args);
    manifest.config_section("species-fit", &args.fit);
    let mut distributions = Vec::new();
    if want_sim {
        let params = theta
            .iter()
            .zip(&sigma)
            .map(|(&t, &s)| PartitionParams::pyp(t, s))
            .collect::<Result<Vec<_>, _>>()?;
        let mut rng = run.spec.with_stream(PREDICT_STREAM).rng();
        let draws = predict_new_species_sim(&data, &params, n_star, replicates, &mut rng)?;
        let p = draws.distribution();
        write_distribution(&run, "prediction.csv", &p)?;
        outputs.push("prediction.csv".into());
        summary_rows.push(("ssm", distribution_summary(&p)));
        distributions.push(p);
    }
    if want_closed {
        let table = StirlingTable::new(n_star as usize)?;
        let p = closed_form_pooled(&data, &theta, n_star, &table)?;
        // `prediction.csv` holds the simulated law when there is one.
        let file = if want_sim { "prediction_closed.csv" } else { "prediction.csv" };
        write_distribution(&run, file, &p)?;
        outputs.push(file.into());
        summary_rows.push(("closed", distribution_summary(&p)));
        distributions.push(p);
    }
    write_csv(
        &run.path("prediction_summary.csv"),
        &["method", "mean", "sd", "q025", "q975"],
        summary_rows.iter().map(|(m, s)| {
            let mut row = vec![m.to_string()];
            row.extend(s.iter().map(|v| num(*v)));
            row
        }),
    )?;
    outputs.push("prediction_summary.csv".into());
    if let [a, b] = distributions.as_slice() {
        manifest
            .diagnostics
            .insert("total_variation_ssm_closed".into(), json!(total_variation(a, b)));
    }
    manifest.parameters = summarize_chains(&fitted.traces)?;
    manifest.acceptance = fitted.acceptance;
    manifest.outputs = outputs;
    manifest.write(&run)
}
