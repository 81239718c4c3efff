//! Experiment configuration: a factorial Monte Carlo design over sample
//! sizes, hypothesized families, statistics and resamplers.

use gofmult_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Family identifier (`norm`, `t5`, `mvnorm`, `gn`, ...).
    pub family: String,
    /// Natural parameters in the family's canonical order.
    pub params: Vec<f64>,
}

fn default_reps() -> usize {
    500
}
fn default_n_rep() -> usize {
    250
}
fn default_level() -> f64 {
    0.05
}
fn default_statistics() -> Vec<String> {
    vec!["snstar".into()]
}
fn default_methods() -> Vec<String> {
    vec!["mp".into()]
}
fn default_grid_m() -> usize {
    1000
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Data dimension (1, 2 or 3).
    pub dim: usize,
    pub true_model: ModelSpec,
    /// Hypothesized family identifiers.
    pub hypotheses: Vec<String>,
    pub n_grid: Vec<usize>,
    /// Outer Monte Carlo repetitions per cell.
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// Resampling replicates per test.
    #[serde(default = "default_n_rep")]
    pub n_rep: usize,
    #[serde(default = "default_statistics")]
    pub statistics: Vec<String>,
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    #[serde(default = "default_level")]
    pub level: f64,
    /// 0 means the rayon default.
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_grid_m")]
    pub grid_m: usize,
    /// Analytic gradient path for multivariate t families.
    #[serde(default = "default_true")]
    pub analytic_gradients: bool,
    #[serde(default)]
    pub pvalue_plus_one: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidInput("reps must be at least 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidInput("level must be inside (0,1)".into()));
        }
        if self.n_grid.is_empty() || self.hypotheses.is_empty() {
            return Err(Error::InvalidInput("n_grid and hypotheses must be non-empty".into()));
        }
        if self.statistics.is_empty() || self.methods.is_empty() {
            return Err(Error::InvalidInput("statistics and methods must be non-empty".into()));
        }
        Ok(())
    }

    pub fn from_path(path: &std::path::Path) -> std::io::Result<std::result::Result<Self, String>> {
        let text = std::fs::read_to_string(path)?;
        let parsed = if path.extension().and_then(|e| e.to_str()) == Some("json") {
            serde_json::from_str::<ExperimentConfig>(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str::<ExperimentConfig>(&text).map_err(|e| e.to_string())
        };
        Ok(parsed)
    }
}
