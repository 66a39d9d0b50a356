use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Translational command limit, m/s.
pub const MAX_SPEED: f64 = 0.5;
/// Yaw-rate command limit: 72 deg/s.
pub const MAX_YAW_RATE: f64 = 72.0 * PI / 180.0;
pub const NUM_DISCRETE_ACTIONS: usize = 9;

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// Full kinematic state in the North-East-Up world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub roll_rate: f64,
    pub pitch_rate: f64,
    pub yaw_rate: f64,
}

impl VehicleState {
    pub fn at_rest(position: [f64; 3], yaw: f64) -> Self {
        Self {
            position,
            yaw: wrap_angle(yaw),
            ..Default::default()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position
            .iter()
            .chain(self.velocity.iter())
            .chain([self.roll, self.pitch, self.yaw, self.roll_rate, self.pitch_rate, self.yaw_rate].iter())
            .all(|v| v.is_finite())
    }

    pub fn distance_to(&self, p: [f64; 3]) -> f64 {
        let d = [p[0] - self.position[0], p[1] - self.position[1], p[2] - self.position[2]];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }
}

/// Body-frame velocity command.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActionCommand {
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub yaw_rate: f64,
}

impl ActionCommand {
    pub fn new(vx: f64, vy: f64, vz: f64, yaw_rate: f64) -> Self {
        Self { vx, vy, vz, yaw_rate }
    }

    pub fn clamped(self) -> Self {
        let c = |v: f64, lim: f64| if v.is_finite() { v.clamp(-lim, lim) } else { 0.0 };
        Self {
            vx: c(self.vx, MAX_SPEED),
            vy: c(self.vy, MAX_SPEED),
            vz: c(self.vz, MAX_SPEED),
            yaw_rate: c(self.yaw_rate, MAX_YAW_RATE),
        }
    }

    /// Map an agent output in [-1, 1]^4 onto the command bounds.
    pub fn from_normalized(a: &[f64]) -> Self {
        assert_eq!(a.len(), 4, "continuous actions have four components");
        Self::new(a[0] * MAX_SPEED, a[1] * MAX_SPEED, a[2] * MAX_SPEED, a[3] * MAX_YAW_RATE).clamped()
    }

    pub fn to_normalized(self) -> [f64; 4] {
        [
            self.vx / MAX_SPEED,
            self.vy / MAX_SPEED,
            self.vz / MAX_SPEED,
            self.yaw_rate / MAX_YAW_RATE,
        ]
    }

    /// Decode a discrete action. Index 0 is the no-op, then the limits of
    /// one component at a time: +vx, -vx, +vy, -vy, +vz, -vz, +yaw, -yaw.
    pub fn from_discrete(index: usize) -> Result<Self> {
        let c = match index {
            0 => Self::default(),
            1 => Self::new(MAX_SPEED, 0.0, 0.0, 0.0),
            2 => Self::new(-MAX_SPEED, 0.0, 0.0, 0.0),
            3 => Self::new(0.0, MAX_SPEED, 0.0, 0.0),
            4 => Self::new(0.0, -MAX_SPEED, 0.0, 0.0),
            5 => Self::new(0.0, 0.0, MAX_SPEED, 0.0),
            6 => Self::new(0.0, 0.0, -MAX_SPEED, 0.0),
            7 => Self::new(0.0, 0.0, 0.0, MAX_YAW_RATE),
            8 => Self::new(0.0, 0.0, 0.0, -MAX_YAW_RATE),
            _ => return Err(Error::InvalidAction(index)),
        };
        Ok(c)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.vx, self.vy, self.vz, self.yaw_rate]
    }
}

/// Action accepted by [`crate::env::Env::step`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EnvAction {
    Command(ActionCommand),
    Discrete(usize),
}

impl EnvAction {
    pub fn command(&self) -> Result<ActionCommand> {
        match *self {
            EnvAction::Command(c) => Ok(c.clamped()),
            EnvAction::Discrete(i) => ActionCommand::from_discrete(i),
        }
    }
}
