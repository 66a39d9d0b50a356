use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::config::EnvConfig;
use super::observation::{elevation_alignment, planar_offsets};
use super::state::{wrap_angle, VehicleState};
use super::targets::TargetSpec;

pub const SUCCESS_REWARD: f64 = 10.0;
pub const SUCCESS_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Penalty {
    #[default]
    None,
    /// Inside the warning band around the risk zone: -1, run continues.
    Warning,
    /// Left the flight area or entered the risk zone: -2, run ends.
    Breach,
}

impl Penalty {
    pub fn value(self) -> f64 {
        match self {
            Penalty::None => 0.0,
            Penalty::Warning => -1.0,
            Penalty::Breach => -2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardEvents {
    pub penalty: Penalty,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_dist: f64,
    pub r_ori: f64,
    pub r_elev: f64,
    pub r_pose: f64,
    pub r_vel: f64,
    pub r_penalty: f64,
    pub r_success: f64,
    pub r_total: f64,
}

/// Distance, orientation and elevation terms of the pose reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseTerms {
    pub r_dist: f64,
    pub r_ori: f64,
    pub r_elev: f64,
}

impl PoseTerms {
    pub fn evaluate(state: &VehicleState, target: &TargetSpec, config: &EnvConfig) -> Self {
        let dist = state.distance_to(target.location);
        let r_dist = -(1.0 - dist / config.d_g()).abs();
        let r_ori = -wrap_angle(state.yaw - target.heading_from(state.position)).abs() / PI;
        let (d_xy, dz) = planar_offsets(state, target);
        let r_elev = elevation_alignment(d_xy, dz) - 1.0;
        Self { r_dist, r_ori, r_elev }
    }

    /// Goal-pose score; `r_dist` is floored at -1 so each factor is non-negative.
    pub fn goal_score(&self) -> f64 {
        (1.0 + self.r_dist.max(-1.0)) * (1.0 + self.r_ori) * (1.0 + self.r_elev)
    }

    pub fn is_goal_pose(&self) -> bool {
        self.goal_score() > SUCCESS_THRESHOLD
    }
}

/// Step reward between `prev` and `next`, `dt` seconds apart.
///
/// The success bonus is withheld when the step ended in a breach: a pose on
/// the goal ring can lie outside the flight area.
pub fn compute_reward(
    prev: &VehicleState,
    next: &VehicleState,
    target: &TargetSpec,
    dt: f64,
    events: RewardEvents,
    config: &EnvConfig,
) -> RewardBreakdown {
    let pose = PoseTerms::evaluate(next, target, config);
    let r_pose = pose.r_dist + pose.r_ori + pose.r_elev;
    let d_prev = prev.distance_to(target.location);
    let d_next = next.distance_to(target.location);
    let r_vel = (d_prev - d_next) / dt;
    let r_penalty = events.penalty.value();
    let r_success = if pose.is_goal_pose() && events.penalty != Penalty::Breach {
        SUCCESS_REWARD
    } else {
        0.0
    };
    RewardBreakdown {
        r_dist: pose.r_dist,
        r_ori: pose.r_ori,
        r_elev: pose.r_elev,
        r_pose,
        r_vel,
        r_penalty,
        r_success,
        r_total: r_vel + 0.1 * r_pose + r_penalty + r_success,
    }
}
