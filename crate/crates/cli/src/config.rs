// SPDX-License-Identifier: MIT OR Apache-2.0

//! Flat TOML configuration for `simulate`. Keys mirror the command-line flags;
//! custom designs go in `[[custom]]` tables with `mean_*` and `sigma_*` keys.
//!
//! ```toml
//! series = [1, 4]
//! n = [100, 500]
//! alpha = [0.05]
//! reps = 2000
//! seed = 42
//!
//! [[custom]]
//! label = "late"
//! mean_variant = "step"
//! mean_levels = [0.0, 0.5]
//! mean_fractions = [0.9]
//! sigma_variant = "constant"
//! sigma_levels = [1.0]
//! ```

use std::path::{Path, PathBuf};

use lmcusum::montecarlo::{SeriesDesign, TableFormat};
use lmcusum::signals::{FlatSpec, TransitionFamily};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub series: Option<Vec<u8>>,
    pub all: Option<bool>,
    pub n: Option<Vec<usize>>,
    pub alpha: Option<Vec<f64>>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub custom: Vec<CustomSeries>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSeries {
    pub label: String,
    pub mean_variant: String,
    #[serde(default)]
    pub mean_levels: Vec<f64>,
    #[serde(default)]
    pub mean_fractions: Vec<f64>,
    pub mean_family: Option<TransitionFamily>,
    pub mean_tau1: Option<f64>,
    pub mean_gamma: Option<f64>,
    pub sigma_variant: String,
    #[serde(default)]
    pub sigma_levels: Vec<f64>,
    #[serde(default)]
    pub sigma_fractions: Vec<f64>,
    pub sigma_family: Option<TransitionFamily>,
    pub sigma_tau1: Option<f64>,
    pub sigma_gamma: Option<f64>,
    #[serde(default)]
    pub sigma_scales: Vec<f64>,
    #[serde(default)]
    pub sigma_families: Vec<TransitionFamily>,
}

impl CustomSeries {
    pub fn design(&self) -> Result<SeriesDesign, CliError> {
        let invalid = |e: lmcusum::Error| CliError::Usage(format!("custom series `{}`: {e}", self.label));
        if self.label.trim().is_empty() {
            return Err(CliError::Usage("custom series need a non-empty label".into()));
        }
        if self.label.parse::<u8>().is_ok_and(|id| (1..=9).contains(&id)) {
            return Err(CliError::Usage(format!(
                "custom label `{}` collides with a preset id",
                self.label
            )));
        }
        let mean = FlatSpec {
            variant: self.mean_variant.clone(),
            levels: self.mean_levels.clone(),
            fractions: self.mean_fractions.clone(),
            family: self.mean_family,
            tau1: self.mean_tau1,
            gamma: self.mean_gamma,
            ..FlatSpec::default()
        }
        .to_mean()
        .map_err(invalid)?;
        let sigma = FlatSpec {
            variant: self.sigma_variant.clone(),
            levels: self.sigma_levels.clone(),
            fractions: self.sigma_fractions.clone(),
            family: self.sigma_family,
            tau1: self.sigma_tau1,
            gamma: self.sigma_gamma,
            scales: self.sigma_scales.clone(),
            families: self.sigma_families.clone(),
        }
        .to_sigma()
        .map_err(invalid)?;
        Ok(SeriesDesign::Custom {
            label: self.label.clone(),
            mean,
            sigma,
        })
    }
}

pub fn load(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

pub fn parse(text: &str) -> Result<FileConfig, String> {
    let config: FileConfig = toml::from_str(text).map_err(|e| e.to_string())?;
    if let Some(f) = &config.format {
        f.parse::<TableFormat>().map_err(|e| e.to_string())?;
    }
    Ok(config)
}
