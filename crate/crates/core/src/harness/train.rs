use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::env::{Env, TerminalCause};
use crate::error::{Error, Result};
use crate::nn::io;
use crate::rl::{ActionMode, Agent, ReplayBuffer, Transition};

/// SplitMix64 finalizer, used to derive independent stream seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One finished environment run during training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub seed: u64,
    pub run: u64,
    /// Global agent step at which the run ended.
    pub step: u64,
    pub target: usize,
    pub length: u64,
    pub reward: f64,
    pub cause: TerminalCause,
}

/// Complete training state; serializing it is a checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainState {
    #[serde(with = "config_text")]
    pub config: ExperimentConfig,
    pub seed: u64,
    /// Chunks completed.
    pub chunk: u32,
    pub step: u64,
    pub agent: Agent,
    pub buffer: ReplayBuffer,
    pub env: Env,
    obs: Vec<f64>,
    run: u64,
    run_reward: f64,
    run_length: u64,
}

impl TrainState {
    pub fn new(config: &ExperimentConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let agent_cfg = config.agent_config()?;
        let mut env = Env::new(config.env.clone())?;
        let agent = Agent::new(agent_cfg.clone(), env.obs_dim(), config.srl.clone(), mix_seed(seed, 1))?;
        let buffer = ReplayBuffer::new(agent_cfg.buffer_capacity, env.obs_dim(), agent.action_space(), mix_seed(seed, 2))?;
        let obs = env.reset(mix_seed(seed, 1 << 32), None)?.values;
        Ok(Self {
            config: config.clone(),
            seed,
            chunk: 0,
            step: 0,
            agent,
            buffer,
            env,
            obs,
            run: 0,
            run_reward: 0.0,
            run_length: 0,
        })
    }

    pub fn is_finished(&self) -> bool {
        self.chunk >= self.config.chunks
    }

    /// One agent step: act, store, learn, reset the environment on run end.
    pub fn step_once(&mut self, log: &mut dyn FnMut(RunLog)) -> Result<()> {
        let warm = self.step < self.agent.config().warmup_steps;
        let action = if warm {
            self.agent.random_action()
        } else {
            self.agent.select_action(&self.obs, ActionMode::Explore)?
        };
        let r = self.env.step(action.to_env())?;
        self.buffer.push(Transition {
            observation: std::mem::take(&mut self.obs),
            action,
            reward: r.reward.r_total,
            next_observation: r.observation.values.clone(),
            terminal: r.cause.is_absorbing(),
        })?;
        self.step += 1;
        self.run_reward += r.reward.r_total;
        self.run_length += 1;
        self.agent.observe_env_step()?;
        if self.agent.should_train() {
            let batch = self.buffer.sample(self.agent.config().batch_size)?;
            self.agent.train_on_batch(&batch)?;
        }
        if r.terminal {
            log(RunLog {
                seed: self.seed,
                run: self.run,
                step: self.step,
                target: self.env.target().index,
                length: self.run_length,
                reward: self.run_reward,
                cause: r.cause,
            });
            self.run += 1;
            self.run_reward = 0.0;
            self.run_length = 0;
            self.obs = self.env.reset(mix_seed(self.seed, (1 << 32) + self.run), None)?.values;
        } else {
            self.obs = r.observation.values;
        }
        Ok(())
    }

    /// Train through the next chunk.
    pub fn run_chunk(&mut self, log: &mut dyn FnMut(RunLog)) -> Result<()> {
        if self.is_finished() {
            return Err(Error::InvalidConfig("training already finished".into()));
        }
        for _ in 0..self.config.chunk_steps {
            self.step_once(log)?;
        }
        self.chunk += 1;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        io::encode(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        io::decode(bytes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::save(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        io::load(path)
    }
}

/// The config travels as TOML text: its free-form agent table needs a
/// self-describing format, which the binary encoding is not.
mod config_text {
    use serde::{de::Error as _, ser::Error as _, Deserialize, Deserializer, Serializer};

    use crate::harness::config::{ExperimentConfig, Preset};

    pub fn serialize<S: Serializer>(c: &ExperimentConfig, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&c.to_toml_string().map_err(S::Error::custom)?)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ExperimentConfig, D::Error> {
        let text = String::deserialize(d)?;
        ExperimentConfig::from_toml_str(&text, Preset::Paper).map_err(D::Error::custom)
    }
}

pub fn checkpoint_name(chunk: u32) -> String {
    format!("chunk_{chunk:03}.ckpt")
}

/// Directory of one (method, seed) run below an output root.
pub fn run_dir(out: &Path, config: &ExperimentConfig, seed: u64) -> PathBuf {
    out.join(config.method_label()).join(format!("seed_{seed}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub dir: PathBuf,
    pub checkpoints: Vec<PathBuf>,
    pub runs: u64,
    pub steps: u64,
}

/// Run (or resume) training for one seed, writing checkpoints and a run log
/// of JSON lines into `run_dir(out, config, seed)`.
pub fn train(config: &ExperimentConfig, seed: u64, out: &Path, resume: Option<TrainState>) -> Result<TrainSummary> {
    let mut state = match resume {
        Some(s) => s,
        None => TrainState::new(config, seed)?,
    };
    let dir = run_dir(out, &state.config, state.seed);
    fs::create_dir_all(&dir)?;
    let log_path = dir.join("train_log.jsonl");
    let mut log_file = if state.chunk == 0 {
        fs::File::create(&log_path)?
    } else {
        fs::OpenOptions::new().create(true).append(true).open(&log_path)?
    };
    let mut write_err = None;
    let mut checkpoints = Vec::new();
    while !state.is_finished() {
        let mut sink = |r: RunLog| {
            let line = serde_json::to_string(&r).map_err(Error::from).and_then(|l| Ok(writeln!(log_file, "{l}")?));
            if let Err(e) = line {
                write_err.get_or_insert(e);
            }
        };
        state.run_chunk(&mut sink)?;
        if let Some(e) = write_err.take() {
            return Err(e);
        }
        if state.config.checkpoints.contains(&state.chunk) {
            let p = dir.join(checkpoint_name(state.chunk));
            state.save(&p)?;
            checkpoints.push(p);
        }
    }
    Ok(TrainSummary {
        dir,
        checkpoints,
        runs: state.run,
        steps: state.step,
    })
}
