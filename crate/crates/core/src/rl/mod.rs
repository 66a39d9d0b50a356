//! Off-policy learners (DQN, TD3, SAC), the replay buffer and the agent
//! wrapper that optionally learns on top of a representation encoder.

mod agent;
mod common;
mod config;
mod dqn;
mod replay;
mod sac;
mod td3;

pub use agent::{ActionMode, Agent, Learner, TrainStats, CONTINUOUS_ACTION_DIM};
pub use common::{StateBatch, UpdateOutput, UpdateTrace};
pub use config::{AgentConfig, Algorithm};
pub use dqn::{argmax, dqn_target, Dqn};
pub use replay::{Action, ActionSpace, Batch, BatchActions, ReplayBuffer, Transition};
pub use sac::{ActorEval, Sac, SacParams};
pub use td3::{Td3, Td3Params};
