//! Experiment configuration from command-line flags or a TOML file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::distributions::{CountLaw, Geometric, Pareto, Poisson};
use crate::error::{Error, Result};
use crate::estimators::{BatchPlan, EstimatorKind, Model, Problem};

/// Environment variable read when `--threads` is not given.
pub const THREADS_ENV: &str = "RARE_MCMC_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Fixed,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountKind {
    Geometric,
    Poisson,
    None,
}

/// Raw experiment settings. Every field is optional so that flags can
/// override a file and so that validation can report all gaps at once.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Step distribution; only `pareto` is available.
    #[arg(long)]
    pub dist: Option<String>,
    /// Pareto tail index.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Number of steps (fixed model).
    #[arg(long)]
    pub n: Option<u64>,
    /// Count law (random model).
    #[arg(long, value_enum)]
    pub count: Option<CountKind>,
    /// Geometric success probability.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Poisson rate (before zero truncation).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Threshold scale; the threshold is a·n, a/ρ or a·λ.
    #[arg(long)]
    pub a: Option<f64>,
    /// Comma-separated subset of mcmc, is, mc.
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<String>>,
    /// Walks per batch for MC and IS; sweeps (times n) for MCMC.
    #[arg(long = "T")]
    #[serde(rename = "T", alias = "t")]
    pub t: Option<u64>,
    #[arg(long)]
    pub batches: Option<u64>,
    #[arg(long)]
    pub burnin: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Weight of the original law in the defensive mixture.
    #[arg(long)]
    pub is_weight: Option<f64>,
    /// Trace the running estimate of batch 0 every this many draws.
    #[arg(long)]
    pub trace_every: Option<u64>,
    /// Worker threads (default: RARE_MCMC_THREADS, then all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Report zero runtimes so the CSV is byte-reproducible.
    #[arg(long)]
    #[serde(default)]
    pub no_timing: bool,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RawConfig {
    /// Loads a TOML file. Unknown keys are rejected.
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(vec![e.message().to_string()]))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: &RawConfig) -> Self {
        overlay!(
            self, other, model, dist, beta, n, count, rho, lambda, a, estimators, t, batches,
            burnin, seed, is_weight, trace_every, threads
        );
        self.no_timing |= other.no_timing;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    Fixed { n: u64 },
    Geometric { rho: f64 },
    Poisson { lambda: f64 },
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub beta: f64,
    pub model: ModelSpec,
    pub a: f64,
    pub estimators: Vec<EstimatorKind>,
    pub t: u64,
    pub batches: u64,
    pub burnin: u64,
    pub seed: u64,
    pub is_weight: f64,
    pub trace_every: u64,
    /// Worker count; 0 means the machine's parallelism.
    pub threads: usize,
    pub timing: bool,
}

pub const DEFAULT_T: u64 = 100_000;
pub const DEFAULT_BATCHES: u64 = 25;
pub const DEFAULT_IS_WEIGHT: f64 = 0.5;

fn positive(errors: &mut Vec<String>, name: &str, v: Option<f64>) -> Option<f64> {
    match v {
        None => {
            errors.push(format!("missing required field `{name}`"));
            None
        }
        Some(x) if !(x.is_finite() && x > 0.0) => {
            errors.push(format!("`{name}` must be a positive finite number, got {x}"));
            None
        }
        Some(x) => Some(x),
    }
}

impl ExperimentConfig {
    /// Validates raw settings, listing every violated constraint. The thread
    /// count falls back to `env_threads` (the value of [`THREADS_ENV`]).
    pub fn from_raw(raw: &RawConfig, env_threads: Option<&str>) -> Result<Self> {
        let mut errors = Vec::new();

        if let Some(dist) = &raw.dist {
            if !dist.eq_ignore_ascii_case("pareto") {
                errors.push(format!("unknown dist `{dist}`; only `pareto` is supported"));
            }
        }
        let beta = positive(&mut errors, "beta", raw.beta);
        let a = match raw.a {
            None => {
                errors.push("missing required field `a`".into());
                None
            }
            Some(x) if !(x.is_finite() && x >= 0.0) => {
                errors.push(format!("`a` must be a nonnegative finite number, got {x}"));
                None
            }
            Some(x) => Some(x),
        };

        let model = match raw.model {
            None => {
                errors.push("missing required field `model`".into());
                None
            }
            Some(ModelKind::Fixed) => {
                if matches!(raw.count, Some(CountKind::Geometric | CountKind::Poisson)) {
                    errors.push("`count` applies only to model=random".into());
                }
                match raw.n {
                    None => {
                        errors.push("missing required field `n` for model=fixed".into());
                        None
                    }
                    Some(0) => {
                        errors.push("`n` must be >= 1".into());
                        None
                    }
                    Some(n) => Some(ModelSpec::Fixed { n }),
                }
            }
            Some(ModelKind::Random) => match raw.count.unwrap_or(CountKind::Geometric) {
                CountKind::Geometric => match raw.rho {
                    None => {
                        errors.push("missing required field `rho` for count=geometric".into());
                        None
                    }
                    Some(r) if !(r > 0.0 && r < 1.0) => {
                        errors.push(format!("`rho` must lie in (0, 1), got {r}"));
                        None
                    }
                    Some(rho) => Some(ModelSpec::Geometric { rho }),
                },
                CountKind::Poisson => {
                    positive(&mut errors, "lambda", raw.lambda).map(|lambda| ModelSpec::Poisson { lambda })
                }
                CountKind::None => {
                    errors.push("model=random needs count=geometric or count=poisson".into());
                    None
                }
            },
        };

        let mut estimators = Vec::new();
        match &raw.estimators {
            None => estimators = vec![EstimatorKind::Mcmc, EstimatorKind::Is, EstimatorKind::Mc],
            Some(names) => {
                for name in names {
                    match EstimatorKind::parse(name) {
                        Some(k) if !estimators.contains(&k) => estimators.push(k),
                        Some(_) => {}
                        None => errors.push(format!("unknown estimator `{name}`")),
                    }
                }
                if names.is_empty() {
                    errors.push("`estimators` must name at least one estimator".into());
                }
            }
        }

        let t = raw.t.unwrap_or(DEFAULT_T);
        if t == 0 {
            errors.push("`T` must be >= 1".into());
        }
        let batches = raw.batches.unwrap_or(DEFAULT_BATCHES);
        if batches < 2 {
            errors.push("batches must be ≥ 2".into());
        }
        let is_weight = raw.is_weight.unwrap_or(DEFAULT_IS_WEIGHT);
        if !(is_weight > 0.0 && is_weight <= 1.0) {
            errors.push(format!("`is_weight` must lie in (0, 1], got {is_weight}"));
        }

        let threads = match (raw.threads, env_threads) {
            (Some(t), _) => t,
            (None, Some(s)) if !s.trim().is_empty() => match s.trim().parse::<usize>() {
                Ok(t) => t,
                Err(_) => {
                    errors.push(format!("{THREADS_ENV} must be a nonnegative integer, got `{s}`"));
                    0
                }
            },
            _ => 0,
        };

        if !errors.is_empty() {
            return Err(Error::Config(errors));
        }
        Ok(ExperimentConfig {
            beta: beta.unwrap(),
            model: model.unwrap(),
            a: a.unwrap(),
            estimators,
            t,
            batches,
            burnin: raw.burnin.unwrap_or(0),
            seed: raw.seed.unwrap_or(0),
            is_weight,
            trace_every: raw.trace_every.unwrap_or(0),
            threads,
            timing: !raw.no_timing,
        })
    }

    /// Reads the optional TOML file, overlays the flags, and validates using
    /// the process environment for the thread fallback.
    pub fn load(file: Option<&PathBuf>, flags: &RawConfig) -> Result<Self> {
        let base = match file {
            Some(p) => RawConfig::from_toml_file(p)?,
            None => RawConfig::default(),
        };
        let env = std::env::var(THREADS_ENV).ok();
        Self::from_raw(&base.overlay(flags), env.as_deref())
    }

    /// Threshold: `a·n` for the fixed model, `a/ρ` for geometric counts and
    /// `a·λ` for Poisson counts.
    pub fn threshold(&self) -> f64 {
        match self.model {
            ModelSpec::Fixed { n } => self.a * n as f64,
            ModelSpec::Geometric { rho } => self.a / rho,
            ModelSpec::Poisson { lambda } => self.a * lambda,
        }
    }

    pub fn problem(&self) -> Result<Problem<Pareto>> {
        let model = match self.model {
            ModelSpec::Fixed { n } => Model::Fixed { n: n as usize },
            ModelSpec::Geometric { rho } => Model::Random {
                count: CountLaw::Geometric(Geometric::new(rho)?),
            },
            ModelSpec::Poisson { lambda } => Model::Random {
                count: CountLaw::Poisson(Poisson::new(lambda)?),
            },
        };
        Ok(Problem {
            step: Pareto::new(self.beta)?,
            model,
            threshold: self.threshold(),
        })
    }

    pub fn plan(&self) -> BatchPlan {
        BatchPlan {
            t: self.t,
            batches: self.batches,
            burnin: self.burnin,
            seed: self.seed,
            is_weight: self.is_weight,
            trace_every: self.trace_every,
            timing: self.timing,
        }
    }

    /// Parameter columns echoed into the summary, as (name, value) pairs.
    /// The thread count is left out on purpose: outputs must not depend on it.
    pub fn params(&self) -> Vec<(&'static str, String)> {
        let (model, n, count, count_param) = match self.model {
            ModelSpec::Fixed { n } => ("fixed", n.to_string(), "none", String::new()),
            ModelSpec::Geometric { rho } => ("random", String::new(), "geometric", format!("{rho}")),
            ModelSpec::Poisson { lambda } => ("random", String::new(), "poisson", format!("{lambda}")),
        };
        vec![
            ("model", model.to_string()),
            ("dist", "pareto".to_string()),
            ("beta", format!("{}", self.beta)),
            ("n", n),
            ("count", count.to_string()),
            ("count_param", count_param),
            ("a", format!("{}", self.a)),
            ("threshold", format!("{}", self.threshold())),
            ("burnin", self.burnin.to_string()),
            ("seed", self.seed.to_string()),
            ("is_weight", format!("{}", self.is_weight)),
        ]
    }
}
