//! Configuration parsing, validation and scenario execution behind the
//! `fvp` binary. Exposed as a library so the integration tests can drive
//! runs in-process.

// negated comparisons like `!(l > 0.0)` are deliberate: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod scenario;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub use config::{validate, Finding, ScenarioConfig};
pub use scenario::{run, RunContext, RunOutcome};

/// Effective settings after applying flag and environment overrides
/// (flag > environment > configuration file > default).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub svg: bool,
    pub log_cap: Option<f64>,
}

impl Overrides {
    /// Fold `FVP_*` environment variables under the explicit flags.
    pub fn with_env(mut self) -> Result<Self> {
        if self.out_dir.is_none() {
            if let Ok(v) = std::env::var("FVP_OUT_DIR") {
                self.out_dir = Some(PathBuf::from(v));
            }
        }
        if self.seed.is_none() {
            if let Ok(v) = std::env::var("FVP_SEED") {
                self.seed = Some(v.parse().context("parsing FVP_SEED")?);
            }
        }
        if !self.svg {
            if let Ok(v) = std::env::var("FVP_SVG") {
                self.svg = v == "1" || v.eq_ignore_ascii_case("true");
            }
        }
        if self.log_cap.is_none() {
            if let Ok(v) = std::env::var("FVP_LOG_CAP") {
                self.log_cap = Some(v.parse().context("parsing FVP_LOG_CAP")?);
            }
        }
        Ok(self)
    }
}

pub fn load_config(path: &Path) -> Result<(ScenarioConfig, Vec<u8>)> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let config: ScenarioConfig = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok((config, bytes))
}

/// Validate and run a configuration file; returns the scenario outcome.
pub fn run_config_file(path: &Path, overrides: &Overrides) -> Result<RunOutcome> {
    let (config, bytes) = load_config(path)?;
    let findings = validate(&config);
    if !findings.is_empty() {
        for finding in &findings {
            eprintln!("invalid config: {finding}");
        }
        anyhow::bail!("{} validation finding(s) in {}", findings.len(), path.display());
    }
    scenario::precheck(&config)?;
    let out_dir = overrides
        .out_dir
        .clone()
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let ctx = RunContext {
        config: &config,
        config_bytes: &bytes,
        out_dir: &out_dir,
        seed: overrides.seed.unwrap_or(config.seed),
        svg: overrides.svg,
        log_cap: overrides.log_cap.unwrap_or(config.thresholds.log_cap),
    };
    scenario::run(&ctx)
}

/// Validate a configuration file, printing findings; `Ok(true)` when clean.
pub fn validate_config_file(path: &Path) -> Result<bool> {
    let (config, _) = load_config(path)?;
    let findings = validate(&config);
    if findings.is_empty() {
        println!("ok: {}", path.display());
        return Ok(true);
    }
    for finding in &findings {
        println!("finding: {finding}");
    }
    Ok(false)
}
