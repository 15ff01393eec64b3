//! Optional config file: JSON with the same keys as the CLI flags
//! (underscored). Flags win over config values; config values win over
//! built-in defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::SolverFlags;

#[derive(Debug)]
pub struct CliError(pub String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

impl From<tgsr::Error> for CliError {
    fn from(e: tgsr::Error) -> Self {
        CliError(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn err(msg: impl Into<String>) -> CliError {
    CliError(msg.into())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub manifest: Option<PathBuf>,
    pub target_labels: Option<PathBuf>,
    pub kappa: Option<usize>,
    pub xi: Option<f64>,
    pub mu0: Option<f64>,
    pub rho: Option<f64>,
    pub mu_max: Option<f64>,
    pub epsilon: Option<f64>,
    pub max_iter: Option<usize>,
    pub kappa_values: Option<String>,
    pub xi_values: Option<String>,
    pub standardize: Option<bool>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub k: Option<usize>,
    pub d: Option<usize>,
    pub classes: Option<usize>,
    pub ns: Option<usize>,
    pub nt: Option<usize>,
    pub planted: Option<String>,
    pub shift: Option<f64>,
    pub noise: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(format!("config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| err(format!("config {}: {e}", path.display())))
    }
}

/// Merge solver flags over config values over library defaults. `kappa` has
/// no default: it must come from a flag or the config.
pub fn solver_options(flags: &SolverFlags, cfg: &FileConfig) -> CliResult<tgsr::SolverOptions> {
    let kappa = flags
        .kappa
        .or(cfg.kappa)
        .ok_or_else(|| err("kappa: required (set --kappa or the config key)"))?;
    let defaults = tgsr::SolverOptions::new(kappa);
    Ok(tgsr::SolverOptions {
        kappa,
        mu0: flags.mu0.or(cfg.mu0).unwrap_or(defaults.mu0),
        rho: flags.rho.or(cfg.rho).unwrap_or(defaults.rho),
        mu_max: flags.mu_max.or(cfg.mu_max).unwrap_or(defaults.mu_max),
        epsilon: flags.epsilon.or(cfg.epsilon).unwrap_or(defaults.epsilon),
        max_iter: flags.max_iter.or(cfg.max_iter).unwrap_or(defaults.max_iter),
    })
}

pub fn required<T>(flag: Option<T>, cfg: Option<T>, name: &str) -> CliResult<T> {
    flag.or(cfg).ok_or_else(|| {
        err(format!(
            "{name}: required (set --{} or the config key)",
            name.replace('_', "-")
        ))
    })
}

pub fn parse_usize_list(text: &str, name: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| err(format!("{name}: bad integer {t:?}")))
        })
        .collect()
}

pub fn parse_f64_list(text: &str, name: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| err(format!("{name}: bad number {t:?}")))
        })
        .collect()
}
