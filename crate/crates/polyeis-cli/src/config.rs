//! Optional TOML defaults, overridden by command-line flags.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub field: Option<String>,
    pub level: Option<u32>,
    pub weight: Option<u32>,
    pub jet_degree: Option<u32>,
    pub truncation: Option<f64>,
    pub nodes: Option<usize>,
    pub seed: Option<u64>,
    pub precision: Option<usize>,
    pub tolerance_scale: Option<f64>,
}

pub fn load(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let cfg: FileConfig = toml::from_str(&text)
        .with_context(|| format!("malformed config {}", path.display()))?;
    if let Some(t) = cfg.truncation {
        anyhow::ensure!(t.is_finite() && t >= 8.0, "truncation must be a finite number >= 8");
    }
    if let Some(s) = cfg.tolerance_scale {
        anyhow::ensure!(s.is_finite() && s > 0.0, "tolerance_scale must be positive");
    }
    Ok(cfg)
}
