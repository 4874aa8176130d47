//! Flags, config-file sections and the merge between them. Every option is
//! optional at parse time so that a flag can be told apart from a value in
//! the config file; defaults are applied by the commands.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CliResult};

pub const OUT_ENV: &str = "BAYESCASE_OUT";

#[derive(Debug, Parser)]
#[command(name = "bayescase", version, about = "Seeded MCMC runs for four Bayesian case studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate GP regression data from the built-in test function.
    GpSim(Invocation<GpSimArgs>),
    /// Fit GP regression to an `x,y` CSV.
    GpFit(Invocation<GpFitArgs>),
    /// Direct Monte Carlo fit of an AR(p) model to a `t,y` CSV.
    ArFit(Invocation<ArFitArgs>),
    /// Fit the additive-outlier dynamic linear model to a `t,y` CSV.
    DlmFit(Invocation<DlmFitArgs>),
    /// Fit the spatiotemporal probit-t CAR model.
    SpatialFit(Invocation<SpatialFitArgs>),
    /// Fit a CRP or Pitman-Yor model to an abundance table.
    SpeciesFit(Invocation<SpeciesFitArgs>),
    /// Predict the number of new species in a further sample.
    SpeciesPredict(Invocation<SpeciesPredictArgs>),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GpSim(_) => "gp-sim",
            Command::GpFit(_) => "gp-fit",
            Command::ArFit(_) => "ar-fit",
            Command::DlmFit(_) => "dlm-fit",
            Command::SpatialFit(_) => "spatial-fit",
            Command::SpeciesFit(_) => "species-fit",
            Command::SpeciesPredict(_) => "species-predict",
        }
    }
}

#[derive(Debug, Args)]
pub struct Invocation<A: Args> {
    /// TOML file with a `[run]` table and a table named after the
    /// subcommand; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub args: A,
}

/// Fill every `None` field of `$dst` from `$src`.
macro_rules! layer {
    ($ty:ty { $($field:ident),* $(,)? }) => {
        impl Layered for $ty {
            fn layer(&mut self, src: Self) {
                $( if self.$field.is_none() { self.$field = src.$field; } )*
            }
        }
    };
}

pub trait Layered {
    fn layer(&mut self, src: Self);
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunArgs {
    /// Output directory [default: $BAYESCASE_OUT, else ./bayescase-out].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Random seed; drawn from the OS and printed when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Total sweeps including burn-in.
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    /// Independent chains run in parallel, each on its own stream.
    #[arg(long)]
    pub chains: Option<usize>,
}
layer!(RunArgs { out, seed, iterations, burn_in, thin, chains });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct GpSimArgs {
    /// Number of design points [default: 100].
    #[arg(long)]
    pub n: Option<usize>,
    /// Noise standard deviation [default: 0.2].
    #[arg(long)]
    pub sigma: Option<f64>,
}
layer!(GpSimArgs { n, sigma });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct GpFitArgs {
    /// CSV with columns `x,y`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Power of the exponential covariance, in (0, 2] [default: 1].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Initial proposal sd for log-odds φ [default: 1].
    #[arg(long)]
    pub step: Option<f64>,
    /// Adapt the proposal during burn-in [default: true].
    #[arg(long)]
    pub adapt: Option<bool>,
    #[arg(long)]
    pub a_sigma: Option<f64>,
    #[arg(long)]
    pub b_sigma: Option<f64>,
    #[arg(long)]
    pub a_mu: Option<f64>,
    #[arg(long)]
    pub b_mu: Option<f64>,
    #[arg(long)]
    pub a_tau: Option<f64>,
    #[arg(long)]
    pub b_tau: Option<f64>,
    #[arg(long)]
    pub a_phi: Option<f64>,
    #[arg(long)]
    pub b_phi: Option<f64>,
}
layer!(GpFitArgs { input, alpha, step, adapt, a_sigma, b_sigma, a_mu, b_mu, a_tau, b_tau, a_phi, b_phi });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ArFitArgs {
    /// CSV with columns `t,y`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Autoregressive order [default: 3].
    #[arg(long)]
    pub p: Option<usize>,
    /// Posterior draws per chain [default: 25000].
    #[arg(long)]
    pub draws: Option<usize>,
}
layer!(ArFitArgs { input, p, draws });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct DlmFitArgs {
    /// CSV with columns `t,y`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Autoregressive order of the latent process [default: 3].
    #[arg(long)]
    pub p: Option<usize>,
    /// Prior outlier probability π [default: 0.2].
    #[arg(long)]
    pub outlier_prob: Option<f64>,
    /// Base observation variance v₀ [default: 0.01].
    #[arg(long)]
    pub obs_var: Option<f64>,
    /// Outlier size variance A [default: 0.1].
    #[arg(long)]
    pub outlier_var: Option<f64>,
    /// Prior mean of each φ_j [default: 0].
    #[arg(long)]
    pub a_phi: Option<f64>,
    /// Prior variance of each φ_j [default: 0.25].
    #[arg(long)]
    pub b_phi: Option<f64>,
    #[arg(long)]
    pub a_omega: Option<f64>,
    /// Inverse-gamma scale for ω [default: least-squares AR variance].
    #[arg(long)]
    pub b_omega: Option<f64>,
    #[arg(long)]
    pub m0: Option<f64>,
    #[arg(long)]
    pub c0: Option<f64>,
}
layer!(DlmFitArgs { input, p, outlier_prob, obs_var, outlier_var, a_phi, b_phi, a_omega, b_omega, m0, c0 });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SpatialFitArgs {
    /// CSV with columns `unit,t,y`.
    #[arg(long)]
    pub panel: Option<PathBuf>,
    /// CSV with columns `unit,x1..xK` and an optional trailing `region`.
    #[arg(long)]
    pub covariates: Option<PathBuf>,
    /// CSV of unit edges `unit_a,unit_b`.
    #[arg(long)]
    pub adjacency: Option<PathBuf>,
    /// CSV of region edges `region_a,region_b`.
    #[arg(long)]
    pub region_adjacency: Option<PathBuf>,
    #[arg(long)]
    pub sigma2_0: Option<f64>,
    #[arg(long)]
    pub nu_0: Option<f64>,
    #[arg(long)]
    pub a_tau: Option<f64>,
    #[arg(long)]
    pub b_tau: Option<f64>,
    #[arg(long)]
    pub a_lambda: Option<f64>,
    #[arg(long)]
    pub b_lambda: Option<f64>,
    /// Hold every τ_t at this value instead of sampling it.
    #[arg(long)]
    pub fixed_tau: Option<f64>,
    #[arg(long)]
    pub fixed_lambda: Option<f64>,
    #[arg(long)]
    pub fixed_xi: Option<f64>,
}
layer!(SpatialFitArgs {
    panel, covariates, adjacency, region_adjacency, sigma2_0, nu_0, a_tau, b_tau, a_lambda,
    b_lambda, fixed_tau, fixed_lambda, fixed_xi
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    Crp,
    Pyp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sim,
    Closed,
    Both,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SpeciesFitArgs {
    /// CSV with columns `size,count`; `est` selects the built-in EST table.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// [default: crp]
    #[arg(long, value_enum)]
    pub process: Option<Process>,
    /// CRP: Gamma shape. PYP: mean of the truncated normal on θ.
    #[arg(long)]
    pub a_theta: Option<f64>,
    /// CRP: Gamma rate. PYP: sd of the truncated normal on θ.
    #[arg(long)]
    pub b_theta: Option<f64>,
    #[arg(long)]
    pub a_sigma: Option<f64>,
    #[arg(long)]
    pub b_sigma: Option<f64>,
    /// Proposal sd for θ on its transformed scale [default: 0.1 CRP, 0.2 PYP].
    #[arg(long)]
    pub step: Option<f64>,
    /// Proposal sd for σ on the logit scale [default: 0.2].
    #[arg(long)]
    pub step_sigma: Option<f64>,
    /// Adapt proposals during burn-in [default: false].
    #[arg(long)]
    pub adapt: Option<bool>,
}
layer!(SpeciesFitArgs { input, process, a_theta, b_theta, a_sigma, b_sigma, step, step_sigma, adapt });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SpeciesPredictArgs {
    /// Fit settings; in a config file these come from `[species-fit]`.
    #[command(flatten)]
    #[serde(skip)]
    pub fit: SpeciesFitArgs,
    /// Size of the further sample [default: 50].
    #[arg(long)]
    pub n_star: Option<u64>,
    /// [default: both]
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Simulated continuations per posterior draw [default: 100].
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Reuse a species-fit trace CSV instead of fitting again.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

impl Layered for SpeciesPredictArgs {
    fn layer(&mut self, src: Self) {
        self.fit.layer(src.fit);
        if self.n_star.is_none() {
            self.n_star = src.n_star;
        }
        if self.method.is_none() {
            self.method = src.method;
        }
        if self.replicates.is_none() {
            self.replicates = src.replicates;
        }
        if self.trace.is_none() {
            self.trace = src.trace;
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    run: Option<toml::Value>,
    #[serde(rename = "gp-sim")]
    gp_sim: Option<toml::Value>,
    #[serde(rename = "gp-fit")]
    gp_fit: Option<toml::Value>,
    #[serde(rename = "ar-fit")]
    ar_fit: Option<toml::Value>,
    #[serde(rename = "dlm-fit")]
    dlm_fit: Option<toml::Value>,
    #[serde(rename = "spatial-fit")]
    spatial_fit: Option<toml::Value>,
    #[serde(rename = "species-fit")]
    species_fit: Option<toml::Value>,
    #[serde(rename = "species-predict")]
    species_predict: Option<toml::Value>,
}

fn section<T: for<'de> Deserialize<'de> + Default>(
    value: Option<toml::Value>,
    name: &str,
    path: &Path,
) -> CliResult<T> {
    match value {
        None => Ok(T::default()),
        Some(v) => v
            .try_into()
            .map_err(|e| invalid!("config {}: [{name}]: {e}", path.display())),
    }
}

/// A subcommand's slice of the config file.
pub trait Section: Sized {
    fn from_file(file: &mut FileConfig, path: &Path) -> CliResult<Self>;
    /// Rebase relative input paths against the config file's directory.
    fn resolve(&mut self, base: &Path);
}

fn rebase(p: &mut Option<PathBuf>, base: &Path) {
    if let Some(path) = p {
        // `est` names the built-in table, not a file.
        if path.is_relative() && path.as_os_str() != "est" {
            *path = base.join(&*path);
        }
    }
}

macro_rules! section {
    ($ty:ty, $field:ident, $name:literal, [$($path:ident),*]) => {
        impl Section for $ty {
            fn from_file(file: &mut FileConfig, path: &Path) -> CliResult<Self> {
                section(file.$field.take(), $name, path)
            }
            #[allow(unused_variables)]
            fn resolve(&mut self, base: &Path) {
                $( rebase(&mut self.$path, base); )*
            }
        }
    };
}

section!(GpSimArgs, gp_sim, "gp-sim", []);
section!(GpFitArgs, gp_fit, "gp-fit", [input]);
section!(ArFitArgs, ar_fit, "ar-fit", [input]);
section!(DlmFitArgs, dlm_fit, "dlm-fit", [input]);
section!(SpatialFitArgs, spatial_fit, "spatial-fit", [panel, covariates, adjacency, region_adjacency]);
section!(SpeciesFitArgs, species_fit, "species-fit", [input]);

impl Section for SpeciesPredictArgs {
    fn from_file(file: &mut FileConfig, path: &Path) -> CliResult<Self> {
        let mut args: Self = section(file.species_predict.take(), "species-predict", path)?;
        args.fit = SpeciesFitArgs::from_file(file, path)?;
        Ok(args)
    }

    fn resolve(&mut self, base: &Path) {
        self.fit.resolve(base);
        rebase(&mut self.trace, base);
    }
}

/// Merge the config file (if any) under the flags.
pub fn merge<A>(inv: Invocation<A>) -> CliResult<(RunArgs, A)>
where
    A: Args + Layered + Section,
{
    let Invocation { config, mut run, mut args } = inv;
    if let Some(path) = config {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| invalid!("config: cannot read {}: {e}", path.display()))?;
        let mut file: FileConfig =
            toml::from_str(&text).map_err(|e| invalid!("config {}: {e}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut file_run: RunArgs = section(file.run.take(), "run", &path)?;
        file_run.out = file_run.out.map(|p| base.join(p));
        let mut file_args = A::from_file(&mut file, &path)?;
        file_args.resolve(&base);
        run.layer(file_run);
        args.layer(file_args);
    }
    Ok((run, args))
}
