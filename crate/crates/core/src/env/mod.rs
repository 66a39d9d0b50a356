//! Kinematic quadcopter simulation of the object-goal navigation task.

mod config;
mod kinematics;
mod observation;
mod reward;
mod sim;
mod state;
mod targets;

pub use config::{EnvConfig, ObsMode};
pub use kinematics::integrate_kinematics;
pub use observation::{build_observation, compute_virtual_sensors, Observation, SENSOR_CENTERS};
pub use reward::{compute_reward, Penalty, PoseTerms, RewardBreakdown, RewardEvents, SUCCESS_REWARD, SUCCESS_THRESHOLD};
pub use sim::{Env, StepInfo, StepResult, TerminalCause, TrajectoryRecord};
pub use state::{wrap_angle, ActionCommand, EnvAction, VehicleState, MAX_SPEED, MAX_YAW_RATE, NUM_DISCRETE_ACTIONS};
pub use targets::{target_grid, TargetSpec, NUM_TARGETS, TARGET_LEVELS};
