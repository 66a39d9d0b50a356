use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::EnvConfig;
use super::kinematics::integrate_kinematics;
use super::observation::{build_observation, Observation};
use super::reward::{compute_reward, Penalty, PoseTerms, RewardBreakdown, RewardEvents};
use super::state::{EnvAction, VehicleState};
use super::targets::{target_grid, TargetSpec, NUM_TARGETS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalCause {
    #[default]
    None,
    Success,
    OutOfArea,
    RiskBreach,
    Flipped,
    StillTimeout,
    TimeLimit,
}

impl TerminalCause {
    pub fn is_terminal(self) -> bool {
        self != TerminalCause::None
    }

    /// Truncation by the time limit is not a true terminal state for
    /// bootstrapping purposes.
    pub fn is_absorbing(self) -> bool {
        !matches!(self, TerminalCause::None | TerminalCause::TimeLimit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    /// Sim time since reset at the end of this step.
    pub elapsed: f64,
    /// Sim time covered by this step.
    pub dt: f64,
    pub substeps: u32,
    pub distance: f64,
    /// Arc length flown during this step.
    pub path_increment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: RewardBreakdown,
    pub terminal: bool,
    pub cause: TerminalCause,
    pub info: StepInfo,
}

/// One line of an exported trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub action: Vec<f64>,
    pub r_total: f64,
    pub terminal_cause: TerminalCause,
}

/// Single quadcopter navigating toward one of the grid targets.
///
/// Deterministic given the reset seed and the action sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Env {
    config: EnvConfig,
    targets: Vec<TargetSpec>,
    rng: ChaCha8Rng,
    state: VehicleState,
    target: TargetSpec,
    elapsed: f64,
    still_time: f64,
    started: bool,
    done: bool,
}

impl Env {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let targets = target_grid(&config);
        let target = targets[0];
        Ok(Self {
            state: VehicleState::at_rest(config.start_position, 0.0),
            config,
            targets,
            rng: ChaCha8Rng::seed_from_u64(0),
            target,
            elapsed: 0.0,
            still_time: 0.0,
            started: false,
            done: false,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> &VehicleState {
        &self.state
    }

    pub fn target(&self) -> &TargetSpec {
        &self.target
    }

    pub fn targets(&self) -> &[TargetSpec] {
        &self.targets
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    pub fn obs_dim(&self) -> usize {
        self.config.obs_mode.dim()
    }

    /// Start a new run. Without an explicit target the grid cell is drawn
    /// uniformly from the seeded generator.
    pub fn reset(&mut self, seed: u64, target_index: Option<usize>) -> Result<Observation> {
        if let Some(i) = target_index {
            if i >= NUM_TARGETS {
                return Err(Error::InvalidTarget(i));
            }
        }
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        let index = match target_index {
            Some(i) => i,
            None => self.rng.random_range(0..NUM_TARGETS),
        };
        let yaw = if self.config.random_initial_yaw {
            self.rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)
        } else {
            0.0
        };
        self.target = self.targets[index];
        self.state = VehicleState::at_rest(self.config.start_position, yaw);
        self.elapsed = 0.0;
        self.still_time = 0.0;
        self.started = true;
        self.done = false;
        Ok(self.observe())
    }

    pub fn observe(&self) -> Observation {
        build_observation(&self.state, &self.target, &self.config)
    }

    /// Overwrite the vehicle state of a running episode.
    pub fn set_state(&mut self, state: VehicleState) {
        self.state = state;
    }

    pub fn step(&mut self, action: EnvAction) -> Result<StepResult> {
        if !self.started {
            return Err(Error::NotReset);
        }
        if self.done {
            return Err(Error::TerminalStep);
        }
        let cmd = action.command()?;
        let [lo, hi] = self.config.action_repeat;
        let repeat = self.rng.random_range(lo..=hi);

        let prev = self.state;
        let mut cause = TerminalCause::None;
        let mut substeps = 0;
        let mut path = 0.0;
        for _ in 0..repeat {
            let before = self.state.position;
            self.state = integrate_kinematics(&self.state, cmd, self.config.dt, &self.config);
            substeps += 1;
            path += distance(before, self.state.position);

            cause = self.substep_cause();
            if cause.is_terminal() {
                break;
            }
        }
        let dt = substeps as f64 * self.config.dt;
        self.elapsed += dt;

        let dist = self.state.distance_to(self.target.location);
        let penalty = match cause {
            TerminalCause::OutOfArea | TerminalCause::RiskBreach => Penalty::Breach,
            TerminalCause::None if dist < self.config.d_risk + self.config.warn_margin => Penalty::Warning,
            _ => Penalty::None,
        };

        if !cause.is_terminal() {
            if distance(prev.position, self.state.position) < self.config.still_displacement {
                self.still_time += dt;
            } else {
                self.still_time = 0.0;
            }
            if self.still_time >= self.config.still_timeout - 1e-9 {
                cause = TerminalCause::StillTimeout;
            } else if self.elapsed >= self.config.time_limit - 1e-9 {
                cause = TerminalCause::TimeLimit;
            }
        }

        let reward = compute_reward(&prev, &self.state, &self.target, dt, RewardEvents { penalty }, &self.config);
        debug_assert!(cause != TerminalCause::Success || reward.r_success > 0.0);
        self.done = cause.is_terminal();

        Ok(StepResult {
            observation: self.observe(),
            reward,
            terminal: self.done,
            cause,
            info: StepInfo {
                elapsed: self.elapsed,
                dt,
                substeps,
                distance: dist,
                path_increment: path,
            },
        })
    }

    fn substep_cause(&self) -> TerminalCause {
        let s = &self.state;
        if !self.config.in_area(s.position) {
            return TerminalCause::OutOfArea;
        }
        if s.distance_to(self.target.location) < self.config.d_risk {
            return TerminalCause::RiskBreach;
        }
        if s.roll.abs() > std::f64::consts::FRAC_PI_2 || s.pitch.abs() > std::f64::consts::FRAC_PI_2 {
            return TerminalCause::Flipped;
        }
        if PoseTerms::evaluate(s, &self.target, &self.config).is_goal_pose() {
            return TerminalCause::Success;
        }
        TerminalCause::None
    }
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}
