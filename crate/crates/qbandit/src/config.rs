//! Experiment configuration: a versioned JSON document with embedded
//! defaults, shared by the CLI and the harness.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{FogConfig, SyntheticConfig};
use crate::policies::{DisparityMode, Exp3pParams, POLICY_IDS};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unsupported schema version {0} (expected 1)")]
    BadSchema(u32),
    #[error("unknown policy id `{0}`")]
    UnknownPolicy(String),
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("arm count must be at least 2")]
    TooFewArms,
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Which cost generator backs the runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnvSection {
    Fog(FogConfig),
    Synthetic(SyntheticConfig),
}

impl EnvSection {
    pub fn arms(&self) -> usize {
        match self {
            EnvSection::Fog(c) => c.arms,
            EnvSection::Synthetic(c) => c.arms,
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            EnvSection::Fog(c) => c.horizon,
            EnvSection::Synthetic(c) => c.horizon,
        }
    }

    pub fn set_arms(&mut self, arms: usize) {
        match self {
            EnvSection::Fog(c) => c.arms = arms,
            EnvSection::Synthetic(c) => c.arms = arms,
        }
    }

    pub fn set_horizon(&mut self, horizon: usize) {
        match self {
            EnvSection::Fog(c) => c.horizon = horizon,
            EnvSection::Synthetic(c) => c.horizon = horizon,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub policies: Vec<String>,
    pub environment: EnvSection,
    pub repetitions: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub disparity_mode: DisparityMode,
    pub exp3p: Exp3pParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema: 1,
            policies: POLICY_IDS.iter().map(|s| s.to_string()).collect(),
            environment: EnvSection::Fog(FogConfig::default()),
            repetitions: 50,
            seed: 20240901,
            epsilon: 0.1,
            disparity_mode: DisparityMode::default(),
            exp3p: Exp3pParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(json)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema != 1 {
            return Err(ConfigError::BadSchema(self.schema));
        }
        for id in &self.policies {
            if !POLICY_IDS.contains(&id.as_str()) {
                return Err(ConfigError::UnknownPolicy(id.clone()));
            }
        }
        if self.repetitions < 1 {
            return Err(ConfigError::NoRepetitions);
        }
        if self.environment.horizon() < 1 {
            return Err(ConfigError::EmptyHorizon);
        }
        if self.environment.arms() < 2 {
            return Err(ConfigError::TooFewArms);
        }
        Ok(())
    }

    pub fn policy_config(&self) -> crate::policies::PolicyConfig {
        crate::policies::PolicyConfig {
            epsilon: self.epsilon,
            disparity_mode: self.disparity_mode,
            exp3p: self.exp3p,
        }
    }
}
