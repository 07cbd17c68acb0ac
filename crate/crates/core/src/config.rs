//! Run configuration shared by the command-line front end and the tests.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{McSpec, WeightedNormSpec};
use crate::error::{EnergyError, ModelError, QuadError};
use crate::model::{validate, ProblemParams};
use crate::quad::QuadratureSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Parse(String),
    #[error(transparent)]
    Params(#[from] ModelError),
    #[error("invalid quadrature spec: {0}")]
    Quad(#[from] QuadError),
    #[error("invalid norm spec: {0}")]
    Norm(#[from] EnergyError),
    #[error("a Monte Carlo seed is required (config `mc.seed` or `--seed`)")]
    MissingSeed,
    #[error("Monte Carlo sample count must be positive")]
    NoSamples,
    #[error("k_list entries must be at least 1")]
    BadK,
}

/// Monte Carlo settings; the seed may be supplied on the command line instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_samples() -> usize {
    1_000_000
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { samples: default_samples(), seed: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

fn default_k_list() -> Vec<usize> {
    vec![6, 8, 12, 16]
}

/// Everything a run reads from its config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ProblemParams,
    #[serde(default)]
    pub quad: QuadratureSpec,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub norm: WeightedNormSpec,
    #[serde(default = "default_k_list")]
    pub k_list: Vec<usize>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn new(params: ProblemParams) -> Self {
        RunConfig {
            params,
            quad: QuadratureSpec::default(),
            mc: McConfig::default(),
            norm: WeightedNormSpec::default(),
            k_list: default_k_list(),
            output: OutputConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Check every sub-config; `needs_mc` makes the seed mandatory.
    pub fn validate(&self, needs_mc: bool) -> Result<(), ConfigError> {
        validate(self.params.clone())?;
        self.quad.validate()?;
        self.norm.validate(self.params.dim)?;
        if self.k_list.contains(&0) {
            return Err(ConfigError::BadK);
        }
        if needs_mc {
            self.mc_spec()?;
        }
        Ok(())
    }

    pub fn mc_spec(&self) -> Result<McSpec, ConfigError> {
        let seed = self.mc.seed.ok_or(ConfigError::MissingSeed)?;
        if self.mc.samples == 0 {
            return Err(ConfigError::NoSamples);
        }
        Ok(McSpec { samples: self.mc.samples, seed })
    }
}
