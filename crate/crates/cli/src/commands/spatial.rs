use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use bayescase_core::spatial::{elicit_b_lambda, fit_spatial, Lattice, PanelData, SpatialHyper, SpatialOptions};
use bayescase_core::Trace;
use nalgebra::DMatrix;
use serde_json::json;

use super::required;
use crate::cli::{RunArgs, SpatialFitArgs};
use crate::error::{invalid, CliResult};
use crate::io::{num, read_table, write_csv};
use crate::output::{summarize_chains, write_traces, ChainDefaults, Manifest, Run};

/// Units in covariate-file order, with their covariates and optional region.
struct Units {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    x: DMatrix<f64>,
    regions: Option<(Vec<usize>, Vec<String>)>,
}

fn read_units(path: &Path) -> CliResult<Units> {
    let table = read_table(path, "covariates")?;
    let headers: Vec<String> = table.headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    if headers.first().map(String::as_str) != Some("unit") {
        return Err(invalid!("covariates {}: first column must be `unit`", path.display()));
    }
    let has_region = headers.last().map(String::as_str) == Some("region");
    let k = headers.len() - 1 - usize::from(has_region);
    if k == 0 {
        return Err(invalid!("covariates {}: no covariate columns", path.display()));
    }
    let n = table.len();
    let mut labels = Vec::with_capacity(n);
    let mut index = HashMap::new();
    let mut x = DMatrix::zeros(n, k);
    let mut region = Vec::new();
    let mut region_names: Vec<String> = Vec::new();
    for r in 0..n {
        let label = table.text(r, 0)?.to_string();
        if index.insert(label.clone(), r).is_some() {
            return Err(invalid!("covariates {}: unit `{label}` listed twice", path.display()));
        }
        labels.push(label);
        for j in 0..k {
            x[(r, j)] = table.real(r, j + 1)?;
        }
        if has_region {
            let name = table.text(r, k + 1)?;
            let id = match region_names.iter().position(|g| g == name) {
                Some(id) => id,
                None => {
                    region_names.push(name.to_string());
                    region_names.len() - 1
                }
            };
            region.push(id);
        }
    }
    Ok(Units {
        labels,
        index,
        x,
        regions: has_region.then_some((region, region_names)),
    })
}

fn read_edges(
    path: &Path,
    field: &str,
    headers: [&str; 2],
    lookup: impl Fn(&str) -> Option<usize>,
) -> CliResult<Vec<(usize, usize)>> {
    let table = read_table(path, field)?;
    table.require_headers(&headers)?;
    (0..table.len())
        .map(|r| {
            let end = |c: usize| -> CliResult<usize> {
                let label = table.text(r, c)?;
                lookup(label).ok_or_else(|| {
                    invalid!("{field} {} line {}: unknown label `{label}`", path.display(), r + 2)
                })
            };
            Ok((end(0)?, end(1)?))
        })
        .collect()
}

/// Complete `unit,t,y` panel. Periods are the distinct t values in
/// increasing order.
fn read_panel(path: &Path, units: &Units) -> CliResult<(DMatrix<u8>, Vec<f64>)> {
    let table = read_table(path, "panel")?;
    table.require_headers(&["unit", "t", "y"])?;
    let mut cells: BTreeMap<(usize, u64), u8> = BTreeMap::new();
    let mut times: Vec<f64> = Vec::new();
    for r in 0..table.len() {
        let label = table.text(r, 0)?;
        let i = *units.index.get(label).ok_or_else(|| {
            invalid!("panel {} line {}: unit `{label}` has no covariates", path.display(), r + 2)
        })?;
        let t = table.real(r, 1)?;
        let y = match table.count(r, 2)? {
            v @ (0 | 1) => v as u8,
            v => return Err(invalid!("panel {} line {}: y = {v} is not 0 or 1", path.display(), r + 2)),
        };
        if cells.insert((i, t.to_bits()), y).is_some() {
            return Err(invalid!(
                "panel {} line {}: duplicate row for unit `{label}` at t = {t}",
                path.display(),
                r + 2
            ));
        }
        if !times.contains(&t) {
            times.push(t);
        }
    }
    times.sort_by(f64::total_cmp);
    let n = units.labels.len();
    let mut y = DMatrix::zeros(n, times.len());
    for (i, label) in units.labels.iter().enumerate() {
        for (c, t) in times.iter().enumerate() {
            y[(i, c)] = *cells.get(&(i, t.to_bits())).ok_or_else(|| {
                invalid!("panel {}: no row for unit `{label}` at t = {t}", path.display())
            })?;
        }
    }
    Ok((y, times))
}

pub fn fit(name: &str, (run, mut args): (RunArgs, SpatialFitArgs)) -> CliResult<()> {
    let panel_path = required(&args.panel, "panel")?;
    let cov_path = required(&args.covariates, "covariates")?;
    let adj_path = required(&args.adjacency, "adjacency")?;
    let units = read_units(&cov_path)?;
    let (y, times) = read_panel(&panel_path, &units)?;
    let edges = read_edges(&adj_path, "adjacency", ["unit_a", "unit_b"], |l| {
        units.index.get(l).copied()
    })?;
    let (region, n_regions, region_edges) = match &units.regions {
        Some((region, names)) => {
            let region_edges = match &args.region_adjacency {
                Some(p) => read_edges(p, "region-adjacency", ["region_a", "region_b"], |l| {
                    names.iter().position(|g| g == l)
                })?,
                None => Vec::new(),
            };
            (region.clone(), names.len(), region_edges)
        }
        None => {
            if args.region_adjacency.is_some() {
                return Err(invalid!(
                    "region-adjacency: given but the covariates file has no `region` column"
                ));
            }
            (Vec::new(), 0, Vec::new())
        }
    };
    let lattice = Lattice::new(units.labels.len(), &edges, region, n_regions, &region_edges)?;
    let data = PanelData::new(y, units.x.clone(), times.clone())?;

    // Fixed defaults; b_λ is elicited below from the lattice and b_τ.
    let mut hyper = SpatialHyper::with_defaults(1.0)?;
    hyper.sigma2_0 = *args.sigma2_0.get_or_insert(hyper.sigma2_0);
    hyper.nu_0 = *args.nu_0.get_or_insert(hyper.nu_0);
    hyper.a_tau = *args.a_tau.get_or_insert(hyper.a_tau);
    hyper.b_tau = *args.b_tau.get_or_insert(hyper.b_tau);
    hyper.a_lambda = *args.a_lambda.get_or_insert(hyper.a_lambda);
    hyper.b_lambda = match args.b_lambda {
        Some(b) => b,
        None => elicit_b_lambda(lattice.units.mean_neighbors(), hyper.b_tau)
            .map_err(|e| invalid!("b-lambda: cannot elicit a default: {e}"))?,
    };
    args.b_lambda = Some(hyper.b_lambda);
    hyper.validate()?;
    let options = SpatialOptions {
        fixed_tau: args.fixed_tau,
        fixed_lambda: args.fixed_lambda,
        fixed_xi: args.fixed_xi,
    };

    let run = Run::new(run, ChainDefaults { iterations: 255_000, burn_in: 5_000, thin: 10 })?;
    let fits = run.run_chains(|chain| Ok(fit_spatial(&data, &lattice, &hyper, &chain, &options)?))?;

    let traces: Vec<Vec<Trace>> = fits
        .iter()
        .map(|f| {
            let mut v = f.beta.clone();
            v.extend(f.gamma.iter().cloned());
            v.push(f.xi.clone());
            v.extend(f.kappa.iter().cloned());
            v.extend(f.tau.iter().cloned());
            v.extend(f.lambda.iter().cloned());
            v
        })
        .collect();
    let mut outputs = write_traces(&run, &traces)?;
    let summaries = summarize_chains(&traces)?;
    write_csv(
        &run.path("effects.csv"),
        &["parameter", "mean", "q025", "q975"],
        summaries
            .iter()
            .map(|s| vec![s.name.clone(), num(s.mean), num(s.q025), num(s.q975)]),
    )?;
    let m = fits.len() as f64;
    write_csv(
        &run.path("random_effects.csv"),
        &["unit", "t", "theta_plus_phi_mean"],
        units.labels.iter().enumerate().flat_map(|(i, label)| {
            let fits = &fits;
            times.iter().enumerate().map(move |(c, t)| {
                let mean = fits.iter().map(|f| f.effect_mean[(i, c)]).sum::<f64>() / m;
                vec![label.clone(), num(*t), num(mean)]
            })
        }),
    )?;
    outputs.push("effects.csv".into());
    outputs.push("random_effects.csv".into());

    let mut manifest = Manifest::new(name, &run, &args);
    manifest.parameters = summaries;
    manifest.diagnostics.insert(
        "max_abs_phi_sum".into(),
        json!(fits.iter().map(|f| f.max_phi_sum).fold(0.0, f64::max)),
    );
    manifest.diagnostics.insert("periods".into(), json!(times));
    manifest.outputs = outputs;
    manifest.write(&run)
}
