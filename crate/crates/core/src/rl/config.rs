use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Dqn,
    Td3,
    Sac,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dqn => "dqn",
            Algorithm::Td3 => "td3",
            Algorithm::Sac => "sac",
        }
    }

    pub fn is_discrete(self) -> bool {
        self == Algorithm::Dqn
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dqn" => Ok(Algorithm::Dqn),
            "td3" => Ok(Algorithm::Td3),
            "sac" => Ok(Algorithm::Sac),
            other => Err(Error::InvalidConfig(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Hyperparameters of one agent. Fields that only apply to one algorithm
/// are ignored by the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub algorithm: Algorithm,
    pub gamma: f64,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub lr_alpha: f64,
    /// Online fraction mixed into target networks per soft update.
    pub tau: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Uniform-random steps before the first update.
    pub warmup_steps: u64,
    /// Environment steps between gradient updates.
    pub train_freq: u64,
    /// Hidden widths of the actor, critic and Q networks.
    pub hidden: Vec<usize>,

    pub eps_start: f64,
    pub eps_end: f64,
    /// Steps over which epsilon decays linearly.
    pub eps_decay_steps: u64,
    /// Environment steps between hard target copies.
    pub target_update_interval: u64,

    pub action_noise: f64,
    pub target_noise: f64,
    pub target_noise_clip: f64,
    pub policy_delay: u64,

    /// Defaults to minus the action dimension.
    pub target_entropy: Option<f64>,
    pub init_alpha: f64,
}

impl AgentConfig {
    /// Library defaults for `algorithm`; `with_srl` selects the narrower
    /// TD3 networks used with a learned representation.
    pub fn defaults(algorithm: Algorithm, with_srl: bool) -> Self {
        let base = Self {
            algorithm,
            gamma: 0.99,
            lr_actor: 1e-3,
            lr_critic: 1e-3,
            lr_alpha: 1e-3,
            tau: 5e-3,
            batch_size: 256,
            buffer_capacity: 1 << 16,
            warmup_steps: 1 << 11,
            train_freq: 1,
            hidden: vec![256, 256],
            eps_start: 1.0,
            eps_end: 0.05,
            eps_decay_steps: 45_000,
            target_update_interval: 10_000,
            action_noise: 0.1,
            target_noise: 0.2,
            target_noise_clip: 0.5,
            policy_delay: 2,
            target_entropy: None,
            init_alpha: 1.0,
        };
        match algorithm {
            Algorithm::Dqn => Self {
                lr_actor: 1e-4,
                lr_critic: 1e-4,
                lr_alpha: 1e-4,
                tau: 1.0,
                batch_size: 32,
                train_freq: 4,
                hidden: vec![64, 64],
                ..base
            },
            Algorithm::Sac => Self {
                lr_actor: 3e-3,
                lr_critic: 3e-3,
                lr_alpha: 3e-3,
                ..base
            },
            Algorithm::Td3 => Self {
                hidden: if with_srl { vec![256, 256] } else { vec![400, 300] },
                ..base
            },
        }
    }

    pub fn entropy_target(&self, action_dim: usize) -> f64 {
        self.target_entropy.unwrap_or(-(action_dim as f64))
    }

    /// Linear epsilon schedule evaluated at an environment step.
    pub fn epsilon(&self, step: u64) -> f64 {
        if self.eps_decay_steps == 0 || step >= self.eps_decay_steps {
            return self.eps_end;
        }
        let frac = step as f64 / self.eps_decay_steps as f64;
        self.eps_start + frac * (self.eps_end - self.eps_start)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0, 1]");
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 {
            return bad("batch size and buffer capacity must be positive");
        }
        if self.train_freq == 0 || self.policy_delay == 0 || self.target_update_interval == 0 {
            return bad("update intervals must be positive");
        }
        if [self.lr_actor, self.lr_critic, self.lr_alpha].iter().any(|&lr| !(lr > 0.0 && lr.is_finite())) {
            return bad("learning rates must be positive");
        }
        if !(0.0..=1.0).contains(&self.eps_start) || !(0.0..=1.0).contains(&self.eps_end) {
            return bad("epsilon must lie in [0, 1]");
        }
        if self.action_noise < 0.0 || self.target_noise < 0.0 || self.target_noise_clip < 0.0 {
            return bad("noise scales must be non-negative");
        }
        if !(self.init_alpha > 0.0) {
            return bad("initial entropy coefficient must be positive");
        }
        if self.hidden.contains(&0) {
            return bad("hidden widths must be positive");
        }
        Ok(())
    }
}
