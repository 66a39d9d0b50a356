use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::rl::{AgentConfig, Algorithm};
use crate::srl::SrlConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// 50 chunks of 9K steps, 5 seeds.
    Paper,
    /// 10 chunks of 9K steps, 3 seeds.
    Desk,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            other => Err(Error::InvalidConfig(format!("unknown preset {other:?}"))),
        }
    }
}

/// Everything that determines a training run apart from the seed.
///
/// Loaded from TOML. `[agent]` holds overrides on top of the defaults of the
/// chosen algorithm; the presence of `[srl]` attaches a representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Method label used in trial files; derived when absent.
    pub label: Option<String>,
    pub algorithm: Algorithm,
    /// Agent steps per training chunk.
    pub chunk_steps: u64,
    pub chunks: u32,
    /// Chunks after which a checkpoint is written (1-based).
    pub checkpoints: Vec<u32>,
    pub seeds: Vec<u64>,
    pub trials_per_target: u32,
    /// Base of the fixed evaluation reset seeds.
    pub eval_seed: u64,
    pub env: EnvConfig,
    pub agent: toml::Table,
    pub srl: Option<SrlConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::preset(Preset::Paper)
    }
}

impl ExperimentConfig {
    pub fn preset(p: Preset) -> Self {
        let (chunks, checkpoints, seeds) = match p {
            Preset::Paper => (50, vec![5, 10, 20, 35, 50], vec![0, 1, 2, 3, 4]),
            Preset::Desk => (10, vec![5, 10], vec![0, 1, 2]),
        };
        Self {
            label: None,
            algorithm: Algorithm::Td3,
            chunk_steps: 9_000,
            chunks,
            checkpoints,
            seeds,
            trials_per_target: 10,
            eval_seed: 1_000_000,
            env: EnvConfig::default(),
            agent: toml::Table::new(),
            srl: None,
        }
    }

    /// Parse TOML text layered over a preset.
    pub fn from_toml_str(text: &str, base: Preset) -> Result<Self> {
        let overlay: toml::Table = toml::from_str(text)?;
        let mut table = toml::Table::try_from(Self::preset(base)).map_err(|e| Error::Serialization(e.to_string()))?;
        merge_tables(&mut table, overlay);
        let cfg: Self = toml::Value::Table(table).try_into()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, base: Preset) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?, base)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn total_steps(&self) -> u64 {
        self.chunk_steps * self.chunks as u64
    }

    pub fn method_label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match &self.srl {
            None => self.algorithm.name().to_string(),
            Some(s) => format!("{}-{}", self.algorithm.name(), s.variant.name()),
        }
    }

    /// Defaults of the algorithm with `[agent]` applied. Without an explicit
    /// override, epsilon decays over the first tenth of training.
    pub fn agent_config(&self) -> Result<AgentConfig> {
        if self.agent.contains_key("algorithm") {
            return Err(Error::InvalidConfig("set the algorithm at the top level, not in [agent]".into()));
        }
        let mut defaults = AgentConfig::defaults(self.algorithm, self.srl.is_some());
        defaults.eps_decay_steps = self.total_steps() / 10;
        let mut table = toml::Table::try_from(defaults).map_err(|e| Error::Serialization(e.to_string()))?;
        merge_tables(&mut table, self.agent.clone());
        let cfg: AgentConfig = toml::Value::Table(table).try_into()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        if self.chunk_steps == 0 || self.chunks == 0 {
            return Err(Error::InvalidConfig("training needs at least one non-empty chunk".into()));
        }
        if self.checkpoints.iter().any(|&c| c == 0 || c > self.chunks) {
            return Err(Error::InvalidConfig(format!(
                "checkpoints {:?} must lie in 1..={}",
                self.checkpoints, self.chunks
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("at least one seed is required".into()));
        }
        if self.trials_per_target == 0 {
            return Err(Error::InvalidConfig("trials per target must be positive".into()));
        }
        if let Some(s) = &self.srl {
            s.validate()?;
        }
        let agent = self.agent_config()?;
        if agent.warmup_steps >= agent.buffer_capacity as u64 {
            return Err(Error::InvalidConfig("warmup must be shorter than the buffer capacity".into()));
        }
        Ok(())
    }
}

/// Recursive merge: nested tables merge key by key, other values replace.
fn merge_tables(base: &mut toml::Table, overlay: toml::Table) {
    for (k, v) in overlay {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_tables(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}
