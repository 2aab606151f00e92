//! Configuration ingestion for the command-line front end.
//!
//! Configs are flat `key = value` text files carrying exactly the
//! [`SystemParams`] field names; command-line flags override file values,
//! and any missing required field is a startup error naming the field.

use crate::game::ScoringMode;
use crate::sim::SystemParams;
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("missing required config field: {0}")]
    MissingField(&'static str),
}

/// Every field optional so that flag overrides can fill the gaps before the
/// required-field check runs.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    servers: Option<u32>,
    total_jobs: Option<u64>,
    reward_threshold: Option<f64>,
    activation_cost: Option<f64>,
    job_cost: Option<f64>,
    mu: Option<f64>,
    sigma: Option<f64>,
    t_upper: Option<f64>,
    nu: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    beta: Option<f64>,
    deadline: Option<f64>,
    strategies: Option<u32>,
    memory: Option<u32>,
    rounds: Option<u32>,
    runs: Option<u32>,
    seed: Option<u64>,
    scoring: Option<ScoringMode>,
    clamp_t0_nonneg: Option<bool>,
    tail_fraction: Option<f64>,
    qoe_mc_samples: Option<u32>,
}

/// Flag-level overrides applied on top of the file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub runs: Option<u32>,
    pub rounds: Option<u32>,
    pub beta: Option<f64>,
    pub memory: Option<u32>,
    pub scoring: Option<ScoringMode>,
}

pub fn load_params(path: &Path, overrides: &Overrides) -> Result<SystemParams, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_params(&text, overrides)
}

pub fn parse_params(text: &str, overrides: &Overrides) -> Result<SystemParams, ConfigError> {
    let mut raw: RawConfig =
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    if let Some(seed) = overrides.seed {
        raw.seed = Some(seed);
    }
    if let Some(runs) = overrides.runs {
        raw.runs = Some(runs);
    }
    if let Some(rounds) = overrides.rounds {
        raw.rounds = Some(rounds);
    }
    if let Some(beta) = overrides.beta {
        raw.beta = Some(beta);
    }
    if let Some(memory) = overrides.memory {
        raw.memory = Some(memory);
    }
    if let Some(scoring) = overrides.scoring {
        raw.scoring = Some(scoring);
    }

    fn req<T>(v: Option<T>, name: &'static str) -> Result<T, ConfigError> {
        v.ok_or(ConfigError::MissingField(name))
    }

    Ok(SystemParams {
        servers: req(raw.servers, "servers")?,
        total_jobs: req(raw.total_jobs, "total_jobs")?,
        reward_threshold: req(raw.reward_threshold, "reward_threshold")?,
        activation_cost: req(raw.activation_cost, "activation_cost")?,
        job_cost: req(raw.job_cost, "job_cost")?,
        mu: req(raw.mu, "mu")?,
        sigma: req(raw.sigma, "sigma")?,
        t_upper: raw.t_upper,
        nu: req(raw.nu, "nu")?,
        a: req(raw.a, "a")?,
        b: req(raw.b, "b")?,
        beta: req(raw.beta, "beta")?,
        deadline: req(raw.deadline, "deadline")?,
        strategies: req(raw.strategies, "strategies")?,
        memory: req(raw.memory, "memory")?,
        rounds: req(raw.rounds, "rounds")?,
        runs: req(raw.runs, "runs")?,
        seed: req(raw.seed, "seed")?,
        scoring: raw.scoring.unwrap_or_default(),
        clamp_t0_nonneg: raw.clamp_t0_nonneg.unwrap_or(false),
        tail_fraction: raw.tail_fraction.unwrap_or(0.5),
        qoe_mc_samples: raw.qoe_mc_samples,
    })
}
