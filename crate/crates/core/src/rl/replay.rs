use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Action {
    Discrete(usize),
    /// Normalized to [-1, 1] per component.
    Continuous(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionSpace {
    Discrete(usize),
    Continuous(usize),
}

impl ActionSpace {
    /// Width of the action when fed to a network (one-hot for discrete).
    pub fn feature_dim(self) -> usize {
        match self {
            ActionSpace::Discrete(n) | ActionSpace::Continuous(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Vec<f64>,
    pub action: Action,
    pub reward: f64,
    pub next_observation: Vec<f64>,
    /// True for absorbing states only; truncated runs are not terminal.
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BatchActions {
    Discrete(Vec<usize>),
    Continuous(Array2<f64>),
}

impl BatchActions {
    pub fn len(&self) -> usize {
        match self {
            BatchActions::Discrete(v) => v.len(),
            BatchActions::Continuous(a) => a.nrows(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Network input encoding: one-hot rows for discrete actions.
    pub fn features(&self, space: ActionSpace) -> Array2<f64> {
        match self {
            BatchActions::Continuous(a) => a.clone(),
            BatchActions::Discrete(idx) => {
                let mut out = Array2::zeros((idx.len(), space.feature_dim()));
                for (i, &a) in idx.iter().enumerate() {
                    out[[i, a]] = 1.0;
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub obs: Array2<f64>,
    pub actions: BatchActions,
    pub rewards: Array1<f64>,
    pub next_obs: Array2<f64>,
    /// 1.0 for absorbing transitions.
    pub terminals: Array1<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// Fixed-capacity FIFO of transitions with a seeded uniform sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    obs_dim: usize,
    space: ActionSpace,
    obs: Vec<f64>,
    next_obs: Vec<f64>,
    actions: Vec<f64>,
    rewards: Vec<f64>,
    terminals: Vec<bool>,
    len: usize,
    /// Slot the next push writes to.
    head: usize,
    rng: ChaCha8Rng,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, obs_dim: usize, space: ActionSpace, seed: u64) -> Result<Self> {
        if capacity == 0 || obs_dim == 0 {
            return Err(Error::InvalidConfig("replay capacity and observation width must be positive".into()));
        }
        let adim = match space {
            ActionSpace::Discrete(_) => 1,
            ActionSpace::Continuous(d) => d,
        };
        Ok(Self {
            capacity,
            obs_dim,
            space,
            obs: vec![0.0; capacity * obs_dim],
            next_obs: vec![0.0; capacity * obs_dim],
            actions: vec![0.0; capacity * adim],
            rewards: vec![0.0; capacity],
            terminals: vec![false; capacity],
            len: 0,
            head: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    fn action_width(&self) -> usize {
        match self.space {
            ActionSpace::Discrete(_) => 1,
            ActionSpace::Continuous(d) => d,
        }
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        if t.observation.len() != self.obs_dim || t.next_observation.len() != self.obs_dim {
            return Err(Error::Shape(format!("observation width must be {}", self.obs_dim)));
        }
        if !t.reward.is_finite() {
            return Err(Error::InvalidConfig("reward must be finite".into()));
        }
        let aw = self.action_width();
        let slot = self.head;
        match (&t.action, self.space) {
            (Action::Discrete(a), ActionSpace::Discrete(n)) if *a < n => self.actions[slot] = *a as f64,
            (Action::Continuous(v), ActionSpace::Continuous(d)) if v.len() == d => {
                self.actions[slot * aw..(slot + 1) * aw].copy_from_slice(v)
            }
            _ => return Err(Error::Shape("action does not match the buffer's action space".into())),
        }
        let d = self.obs_dim;
        self.obs[slot * d..(slot + 1) * d].copy_from_slice(&t.observation);
        self.next_obs[slot * d..(slot + 1) * d].copy_from_slice(&t.next_observation);
        self.rewards[slot] = t.reward;
        self.terminals[slot] = t.terminal;
        self.head = (self.head + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
        Ok(())
    }

    /// Stored transition by age, 0 being the oldest.
    pub fn get(&self, age: usize) -> Option<Transition> {
        if age >= self.len {
            return None;
        }
        let slot = (self.head + self.capacity - self.len + age) % self.capacity;
        Some(self.at_slot(slot))
    }

    fn at_slot(&self, slot: usize) -> Transition {
        let d = self.obs_dim;
        let aw = self.action_width();
        let action = match self.space {
            ActionSpace::Discrete(_) => Action::Discrete(self.actions[slot] as usize),
            ActionSpace::Continuous(_) => Action::Continuous(self.actions[slot * aw..(slot + 1) * aw].to_vec()),
        };
        Transition {
            observation: self.obs[slot * d..(slot + 1) * d].to_vec(),
            action,
            reward: self.rewards[slot],
            next_observation: self.next_obs[slot * d..(slot + 1) * d].to_vec(),
            terminal: self.terminals[slot],
        }
    }

    pub fn sample_indices(&mut self, n: usize) -> Result<Vec<usize>> {
        if self.len == 0 {
            return Err(Error::EmptyBuffer);
        }
        if n == 0 {
            return Err(Error::InvalidConfig("batch size must be positive".into()));
        }
        Ok((0..n).map(|_| self.rng.random_range(0..self.len)).collect())
    }

    /// Uniform sample with replacement.
    pub fn sample(&mut self, n: usize) -> Result<Batch> {
        let idx = self.sample_indices(n)?;
        Ok(self.gather(&idx))
    }

    /// Build a batch from slot indices.
    pub fn gather(&self, idx: &[usize]) -> Batch {
        let d = self.obs_dim;
        let n = idx.len();
        let mut obs = Array2::zeros((n, d));
        let mut next_obs = Array2::zeros((n, d));
        let mut rewards = Array1::zeros(n);
        let mut terminals = Array1::zeros(n);
        for (row, &slot) in idx.iter().enumerate() {
            obs.row_mut(row)
                .as_slice_mut()
                .unwrap()
                .copy_from_slice(&self.obs[slot * d..(slot + 1) * d]);
            next_obs
                .row_mut(row)
                .as_slice_mut()
                .unwrap()
                .copy_from_slice(&self.next_obs[slot * d..(slot + 1) * d]);
            rewards[row] = self.rewards[slot];
            terminals[row] = if self.terminals[slot] { 1.0 } else { 0.0 };
        }
        let actions = match self.space {
            ActionSpace::Discrete(_) => BatchActions::Discrete(idx.iter().map(|&s| self.actions[s] as usize).collect()),
            ActionSpace::Continuous(aw) => {
                let mut a = Array2::zeros((n, aw));
                for (row, &slot) in idx.iter().enumerate() {
                    a.row_mut(row)
                        .as_slice_mut()
                        .unwrap()
                        .copy_from_slice(&self.actions[slot * aw..(slot + 1) * aw]);
                }
                BatchActions::Continuous(a)
            }
        };
        Batch {
            obs,
            actions,
            rewards,
            next_obs,
            terminals,
        }
    }
}
