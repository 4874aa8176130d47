//! Shared run plumbing: seeds, chain specs, parallel chains, trace files
//! and the JSON manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use bayescase_core::mcmc::{split_rhat, summarize, ChainSpec, Trace};
use serde::Serialize;
use serde_json::Value;

use crate::cli::{RunArgs, OUT_ENV};
use crate::error::{invalid, CliError, CliResult};
use crate::io::{num, write_csv};

pub const SCHEMA_VERSION: u32 = 1;

/// Default chain lengths for a subcommand.
#[derive(Debug, Clone, Copy)]
pub struct ChainDefaults {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
}

/// A run with every shared setting resolved.
pub struct Run {
    pub out: PathBuf,
    pub seed: u64,
    pub chains: usize,
    pub spec: ChainSpec,
    pub args: RunArgs,
    started: Instant,
}

impl Run {
    pub fn new(mut args: RunArgs, defaults: ChainDefaults) -> CliResult<Self> {
        let started = Instant::now();
        let out = args
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("bayescase-out"));
        let seed = match args.seed {
            Some(s) => s,
            None => {
                let s = rand::random::<u64>();
                eprintln!("seed: {s}");
                s
            }
        };
        let chains = args.chains.unwrap_or(1);
        if chains == 0 {
            return Err(invalid!("chains: must be at least 1"));
        }
        let iterations = args.iterations.unwrap_or(defaults.iterations);
        let burn_in = args.burn_in.unwrap_or(defaults.burn_in);
        let thin = args.thin.unwrap_or(defaults.thin);
        if thin == 0 {
            return Err(invalid!("thin: must be positive"));
        }
        if burn_in >= iterations {
            return Err(invalid!(
                "burn-in: {burn_in} must be smaller than iterations ({iterations})"
            ));
        }
        let spec = ChainSpec::new(iterations, burn_in, thin, seed)
            .map_err(|e| invalid!("chain settings: {e}"))?;
        prepare_out(&out)?;
        args.out = Some(out.clone());
        args.seed = Some(seed);
        args.chains = Some(chains);
        args.iterations = Some(iterations);
        args.burn_in = Some(burn_in);
        args.thin = Some(thin);
        Ok(Self { out, seed, chains, spec, args, started })
    }

    /// Chain `k` shares the seed and uses stream `k`, so chain 0 of a
    /// multi-chain run equals the single-chain run.
    pub fn chain_spec(&self, k: usize) -> ChainSpec {
        self.spec.with_stream(k as u64)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Run every chain on its own thread and return results in chain order.
    pub fn run_chains<T, F>(&self, f: F) -> CliResult<Vec<T>>
    where
        T: Send,
        F: Fn(ChainSpec) -> CliResult<T> + Sync,
    {
        if self.chains == 1 {
            return Ok(vec![f(self.chain_spec(0))?]);
        }
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..self.chains)
                .map(|k| {
                    let spec = self.chain_spec(k);
                    let f = &f;
                    s.spawn(move || f(spec))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().map_err(|_| CliError::Model("a chain thread panicked".into()))?)
                .collect()
        })
    }

    pub fn elapsed(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }
}

fn prepare_out(out: &Path) -> CliResult<()> {
    std::fs::create_dir_all(out)
        .map_err(|e| invalid!("out: cannot create {}: {e}", out.display()))?;
    let probe = out.join(".bayescase-write-test");
    std::fs::write(&probe, b"")
        .map_err(|e| invalid!("out: {} is not writable: {e}", out.display()))?;
    let _ = std::fs::remove_file(probe);
    Ok(())
}

/// Trace files: `traces.csv` for one chain, `traces_chain<k>.csv` (k from 1)
/// otherwise. Columns are `draw` followed by one column per trace.
pub fn write_traces(run: &Run, chains: &[Vec<Trace>]) -> CliResult<Vec<String>> {
    let mut names = Vec::new();
    for (k, traces) in chains.iter().enumerate() {
        let name = if chains.len() == 1 {
            "traces.csv".to_string()
        } else {
            format!("traces_chain{}.csv", k + 1)
        };
        let mut headers = vec!["draw"];
        headers.extend(traces.iter().map(|t| t.name.as_str()));
        let len = traces.first().map_or(0, Trace::len);
        let rows = (0..len).map(|i| {
            let mut row = vec![(i + 1).to_string()];
            row.extend(traces.iter().map(|t| num(t.draws()[i])));
            row
        });
        write_csv(&run.path(&name), &headers, rows)?;
        names.push(name);
    }
    Ok(names)
}

#[derive(Debug, Serialize)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
    pub ess: f64,
    /// Split-chain potential scale reduction; only with several chains.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhat: Option<f64>,
}

/// Pool matching traces across chains and summarize each parameter.
pub fn summarize_chains(chains: &[Vec<Trace>]) -> CliResult<Vec<ParameterSummary>> {
    let Some(first) = chains.first() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(first.len());
    for (j, trace) in first.iter().enumerate() {
        let per_chain: Vec<&Trace> = chains.iter().map(|c| &c[j]).collect();
        let pooled = Trace::pooled(per_chain.iter().copied())
            .ok_or_else(|| CliError::Model("empty trace".into()))?;
        let s = summarize(&pooled)?;
        let ess = if chains.len() == 1 {
            s.ess
        } else {
            per_chain
                .iter()
                .map(|t| summarize(t).map(|x| x.ess))
                .sum::<Result<f64, _>>()?
        };
        let rhat = if chains.len() > 1 {
            let draws: Vec<&[f64]> = per_chain.iter().map(|t| t.draws()).collect();
            split_rhat(&draws).ok()
        } else {
            None
        };
        out.push(ParameterSummary {
            name: trace.name.clone(),
            mean: s.mean,
            sd: s.sd,
            q025: s.q025,
            q50: s.q50,
            q975: s.q975,
            ess,
            rhat,
        });
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub version: String,
    /// Effective configuration, laid out like the config file.
    pub config: Value,
    pub seed: u64,
    pub chains: usize,
    pub wall_clock_seconds: f64,
    pub parameters: Vec<ParameterSummary>,
    /// Post-burn-in Metropolis acceptance rates, one entry per chain.
    pub acceptance: serde_json::Map<String, Value>,
    pub diagnostics: serde_json::Map<String, Value>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new<A: Serialize>(command: &str, run: &Run, args: &A) -> Self {
        let mut config = serde_json::Map::new();
        config.insert("run".into(), serde_json::to_value(&run.args).unwrap_or(Value::Null));
        config.insert(command.into(), serde_json::to_value(args).unwrap_or(Value::Null));
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: Value::Object(config),
            seed: run.seed,
            chains: run.chains,
            wall_clock_seconds: 0.0,
            parameters: Vec::new(),
            acceptance: serde_json::Map::new(),
            diagnostics: serde_json::Map::new(),
            outputs: Vec::new(),
        }
    }

    /// Add another config-file section to the echoed configuration.
    pub fn config_section<A: Serialize>(&mut self, name: &str, args: &A) {
        if let Value::Object(map) = &mut self.config {
            map.insert(name.into(), serde_json::to_value(args).unwrap_or(Value::Null));
        }
    }

    pub fn write(mut self, run: &Run) -> CliResult<()> {
        self.wall_clock_seconds = run.elapsed();
        self.outputs.push("manifest.json".into());
        let path = run.path("manifest.json");
        let text = serde_json::to_string_pretty(&self)
            .map_err(|e| CliError::Model(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}
