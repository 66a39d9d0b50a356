use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::train::mix_seed;
use crate::env::{wrap_angle, ActionCommand, Env, EnvAction, EnvConfig, TerminalCause, TrajectoryRecord, MAX_SPEED, MAX_YAW_RATE, NUM_TARGETS};
use crate::error::{Error, Result};
use crate::metrics::{shortest_path, TrialRecord};
use crate::rl::{Action, ActionMode, Agent};

/// Anything that can fly the vehicle during evaluation.
pub trait Policy {
    fn act(&mut self, env: &Env, obs: &[f64]) -> Result<EnvAction>;

    /// Normalized command components for trajectory export.
    fn describe(&self, action: &EnvAction) -> Vec<f64> {
        action.command().map(|c| c.to_normalized().to_vec()).unwrap_or_default()
    }
}

/// Greedy (exploitation) behaviour of a trained agent.
pub struct AgentPolicy<'a>(pub &'a mut Agent);

impl Policy for AgentPolicy<'_> {
    fn act(&mut self, _env: &Env, obs: &[f64]) -> Result<EnvAction> {
        Ok(self.0.select_action(obs, ActionMode::Exploit)?.to_env())
    }
}

/// Uniform random actions.
pub struct RandomPolicy {
    rng: ChaCha8Rng,
    discrete: bool,
}

impl RandomPolicy {
    pub fn new(seed: u64, discrete: bool) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            discrete,
        }
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, _env: &Env, _obs: &[f64]) -> Result<EnvAction> {
        let a = if self.discrete {
            Action::Discrete(self.rng.random_range(0..crate::env::NUM_DISCRETE_ACTIONS))
        } else {
            Action::Continuous((0..4).map(|_| self.rng.random_range(-1.0..=1.0)).collect())
        };
        Ok(a.to_env())
    }
}

/// Scripted controller with privileged state access: turn in place to face
/// the target, then fly a straight line to the nearest goal-ring point under
/// proportional control while holding the heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePolicy {
    pub position_gain: f64,
    pub yaw_gain: f64,
    /// Heading error below which translation starts.
    pub align_tolerance: f64,
}

impl Default for OraclePolicy {
    fn default() -> Self {
        Self {
            position_gain: 1.25,
            yaw_gain: 2.5,
            align_tolerance: 0.02,
        }
    }
}

impl Policy for OraclePolicy {
    fn act(&mut self, env: &Env, _obs: &[f64]) -> Result<EnvAction> {
        let s = env.state();
        let t = env.target();
        let cfg = env.config();
        let err = wrap_angle(t.heading_from(s.position) - s.yaw);
        let yaw_rate = (self.yaw_gain * err).clamp(-MAX_YAW_RATE, MAX_YAW_RATE);
        if err.abs() > self.align_tolerance {
            return Ok(EnvAction::Command(ActionCommand::new(0.0, 0.0, 0.0, yaw_rate)));
        }
        let dx = t.location[0] - s.position[0];
        let dy = t.location[1] - s.position[1];
        let d_xy = (dx * dx + dy * dy).sqrt();
        let radial = d_xy - cfg.d_g();
        let (ux, uy) = if d_xy > 0.0 { (dx / d_xy, dy / d_xy) } else { (0.0, 0.0) };
        let mut v = [
            self.position_gain * radial * ux,
            self.position_gain * radial * uy,
            self.position_gain * (t.location[2] - s.position[2]),
        ];
        // scale the whole vector so the direction survives the speed limit
        let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if peak > MAX_SPEED {
            v.iter_mut().for_each(|x| *x *= MAX_SPEED / peak);
        }
        let (sn, cs) = s.yaw.sin_cos();
        let body_x = cs * v[0] + sn * v[1];
        let body_y = -sn * v[0] + cs * v[1];
        Ok(EnvAction::Command(ActionCommand::new(body_x, body_y, v[2], yaw_rate)))
    }
}

/// Identity of an evaluation pass, copied into every record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSpec {
    pub method: String,
    pub seed: u64,
    pub checkpoint: u32,
    pub trials_per_target: u32,
    pub eval_seed: u64,
}

/// Trajectory sample tagged with its trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryLine {
    pub method: String,
    pub seed: u64,
    pub checkpoint: u32,
    pub target: usize,
    pub trial: u32,
    #[serde(flatten)]
    pub record: TrajectoryRecord,
}

/// Reset seed of a trial; shared by every method so all of them face the
/// same action-repeat draws.
pub fn trial_seed(eval_seed: u64, target: usize, trial: u32) -> u64 {
    mix_seed(eval_seed, (target as u64) << 32 | trial as u64)
}

/// Fly one trial to termination.
pub fn run_trial(
    env: &mut Env,
    policy: &mut dyn Policy,
    spec: &EvalSpec,
    target: usize,
    trial: u32,
    mut trajectory: Option<&mut Vec<TrajectoryLine>>,
) -> Result<TrialRecord> {
    let mut obs = env.reset(trial_seed(spec.eval_seed, target, trial), Some(target))?.values;
    let start = env.state().position;
    let shortest = shortest_path(start, env.target(), env.config());
    let mut total = 0.0;
    let mut path = 0.0;
    let mut steps = 0u32;
    loop {
        let a = policy.act(env, &obs)?;
        let r = env.step(a)?;
        total += r.reward.r_total;
        path += r.info.path_increment;
        steps += 1;
        if let Some(t) = trajectory.as_deref_mut() {
            let s = env.state();
            t.push(TrajectoryLine {
                method: spec.method.clone(),
                seed: spec.seed,
                checkpoint: spec.checkpoint,
                target,
                trial,
                record: TrajectoryRecord {
                    t: r.info.elapsed,
                    x: s.position[0],
                    y: s.position[1],
                    z: s.position[2],
                    roll: s.roll,
                    pitch: s.pitch,
                    yaw: s.yaw,
                    action: policy.describe(&a),
                    r_total: r.reward.r_total,
                    terminal_cause: r.cause,
                },
            });
        }
        if r.terminal {
            return Ok(TrialRecord {
                method: spec.method.clone(),
                seed: spec.seed,
                checkpoint: spec.checkpoint,
                target,
                trial,
                cumulative_reward: total,
                success: r.cause == TerminalCause::Success,
                terminal_cause: r.cause,
                path_length: path,
                shortest_path: shortest,
                final_distance: r.info.distance,
                r_dist: r.reward.r_dist,
                r_ori: r.reward.r_ori,
                r_elev: r.reward.r_elev,
                steps,
                elapsed: r.info.elapsed,
            });
        }
        obs = r.observation.values;
    }
}

/// All trials: every target `trials_per_target` times, target-major order.
pub fn evaluate(
    env_config: &EnvConfig,
    policy: &mut dyn Policy,
    spec: &EvalSpec,
    mut trajectories: Option<&mut Vec<TrajectoryLine>>,
) -> Result<Vec<TrialRecord>> {
    let mut env = Env::new(env_config.clone())?;
    let mut out = Vec::with_capacity(NUM_TARGETS * spec.trials_per_target as usize);
    for target in 0..NUM_TARGETS {
        for trial in 0..spec.trials_per_target {
            out.push(run_trial(&mut env, policy, spec, target, trial, trajectories.as_deref_mut())?);
        }
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    for r in rows {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Parse JSON lines, naming the offending line on failure.
pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Serialization(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}
