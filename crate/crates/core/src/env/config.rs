use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which target information is appended to the base vehicle state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ObsMode {
    /// Vehicle state only (12 components).
    Base,
    /// Vehicle state, bearing to target and raw target coordinates (16).
    Tc,
    /// Vehicle state and six virtual target sensors (18).
    Ts,
}

impl ObsMode {
    pub fn dim(self) -> usize {
        match self {
            ObsMode::Base => 12,
            ObsMode::Tc => 16,
            ObsMode::Ts => 18,
        }
    }
}

/// Environment parameters. Field names double as keys in the `[env]`
/// section of an experiment file; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Flight area half-extent along x (north), meters.
    pub half_extent_x: f64,
    /// Flight area half-extent along y (east), meters.
    pub half_extent_y: f64,
    pub z_min: f64,
    pub z_max: f64,
    /// Radius of the risk zone around the target.
    pub d_risk: f64,
    /// Distance threshold; the goal ring sits at `d_risk + d_thr / 2`.
    pub d_thr: f64,
    /// Width of the warning band just outside the risk zone.
    pub warn_margin: f64,
    /// Physics substep, seconds.
    pub dt: f64,
    /// Inclusive range of physics substeps per agent decision.
    pub action_repeat: [u32; 2],
    /// A run ends after this much accumulated sim time without moving.
    pub still_timeout: f64,
    /// Per-decision displacement below which the vehicle counts as still.
    pub still_displacement: f64,
    pub obs_mode: ObsMode,
    /// Sim-time limit of a single run, seconds.
    pub time_limit: f64,
    /// Horizontal offset of the non-center grid cells from the origin.
    pub target_offset: f64,
    /// Start position of every run.
    pub start_position: [f64; 3],
    /// First-order velocity lag time constant; 0 disables the lag.
    pub velocity_lag: f64,
    /// Roll/pitch per unit of body-frame horizontal acceleration, rad per m/s^2.
    pub attitude_gain: f64,
    /// Clamp on emulated roll and pitch, radians.
    pub attitude_limit: f64,
    /// Normalizer for roll and pitch rates, rad/s.
    pub attitude_rate_scale: f64,
    /// Draw the initial yaw uniformly instead of starting at 0.
    pub random_initial_yaw: bool,
    /// Half-width of the front and side virtual sensor gates, radians.
    pub sensor_half_width: f64,
    /// Half-width of the back virtual sensor gate, radians.
    pub sensor_back_half_width: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            half_extent_x: 1.15,
            half_extent_y: 1.15,
            z_min: 0.0,
            z_max: 2.0,
            d_risk: 0.1,
            d_thr: 0.5,
            warn_margin: 0.05,
            dt: 0.032,
            action_repeat: [5, 7],
            still_timeout: 5.0,
            still_displacement: 0.002,
            obs_mode: ObsMode::Ts,
            time_limit: 60.0,
            target_offset: 0.95,
            start_position: [0.0, 0.0, 1.0],
            velocity_lag: 0.2,
            attitude_gain: 1.0 / 9.81,
            attitude_limit: 20f64.to_radians(),
            attitude_rate_scale: std::f64::consts::TAU,
            random_initial_yaw: false,
            sensor_half_width: 45f64.to_radians(),
            sensor_back_half_width: 90f64.to_radians(),
        }
    }
}

impl EnvConfig {
    /// Goal distance from the target: `d_risk + d_thr / 2`.
    pub fn d_g(&self) -> f64 {
        self.d_risk + self.d_thr / 2.0
    }

    /// Diagonal of the flight volume, used as the sensor proximity range.
    pub fn diagonal(&self) -> f64 {
        let wx = 2.0 * self.half_extent_x;
        let wy = 2.0 * self.half_extent_y;
        let wz = self.z_max - self.z_min;
        (wx * wx + wy * wy + wz * wz).sqrt()
    }

    pub fn in_area(&self, p: [f64; 3]) -> bool {
        p[0].abs() <= self.half_extent_x
            && p[1].abs() <= self.half_extent_y
            && p[2] >= self.z_min
            && p[2] <= self.z_max
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.d_risk > 0.0) {
            return bad("d_risk must be positive");
        }
        if !(self.d_thr > 0.0) {
            return bad("d_thr must be positive");
        }
        if !(self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.half_extent_x > 0.0 && self.half_extent_y > 0.0 && self.z_max > self.z_min) {
            return bad("flight area must have positive extent");
        }
        let [lo, hi] = self.action_repeat;
        if lo == 0 || lo > hi {
            return bad("action_repeat must be a non-empty range of positive integers");
        }
        if !(self.time_limit > 0.0 && self.still_timeout > 0.0) {
            return bad("time limits must be positive");
        }
        if self.velocity_lag < 0.0 || self.warn_margin < 0.0 || self.still_displacement < 0.0 {
            return bad("velocity_lag, warn_margin and still_displacement must be non-negative");
        }
        if !(self.attitude_limit > 0.0 && self.attitude_rate_scale > 0.0) {
            return bad("attitude limits must be positive");
        }
        if !(self.sensor_half_width > 0.0 && self.sensor_back_half_width > 0.0) {
            return bad("sensor gate widths must be positive");
        }
        if !self.in_area(self.start_position) {
            return bad("start position lies outside the flight area");
        }
        Ok(())
    }
}
