use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SrlVariant {
    /// Deterministic codes trained with a contrastive loss.
    Det,
    /// Gaussian codes trained with a KL loss.
    Sto,
    /// Deterministic codes regressed onto the online encoder's next code.
    L2Online,
}

impl SrlVariant {
    pub fn name(self) -> &'static str {
        match self {
            SrlVariant::Det => "det",
            SrlVariant::Sto => "sto",
            SrlVariant::L2Online => "l2_online",
        }
    }
}

impl std::str::FromStr for SrlVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "det" => Ok(SrlVariant::Det),
            "sto" => Ok(SrlVariant::Sto),
            "l2_online" | "l2" => Ok(SrlVariant::L2Online),
            other => Err(Error::InvalidConfig(format!("unknown representation variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SrlConfig {
    pub variant: SrlVariant,
    pub latent_dim: usize,
    pub hidden: usize,
    pub temperature: f64,
    /// Weight of the predictive loss in the joint objective.
    pub weight: f64,
    /// Share of the target encoder kept on each moving-average step.
    pub momentum: f64,
    pub lr: f64,
}

impl Default for SrlConfig {
    fn default() -> Self {
        Self {
            variant: SrlVariant::Det,
            latent_dim: 32,
            hidden: 128,
            temperature: 0.1,
            weight: 1.0,
            momentum: 0.999,
            lr: 1e-3,
        }
    }
}

impl SrlConfig {
    pub fn with_variant(variant: SrlVariant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.latent_dim == 0 || self.hidden == 0 {
            return bad("latent and hidden widths must be positive");
        }
        if !(self.temperature > 0.0) {
            return bad("temperature must be positive");
        }
        if !(0.0..=1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1]");
        }
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return bad("loss weight must be non-negative");
        }
        if !(self.lr > 0.0) {
            return bad("learning rate must be positive");
        }
        Ok(())
    }
}
