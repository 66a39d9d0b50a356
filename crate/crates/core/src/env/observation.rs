use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::config::{EnvConfig, ObsMode};
use super::state::{wrap_angle, VehicleState, MAX_SPEED, MAX_YAW_RATE};
use super::targets::TargetSpec;

/// Sensor center angles relative to the vehicle heading: front, front-left,
/// front-right, left, right, back.
pub const SENSOR_CENTERS: [f64; 6] = [0.0, PI / 6.0, -PI / 6.0, FRAC_PI_2, -FRAC_PI_2, PI];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub mode: ObsMode,
    pub values: Vec<f64>,
}

impl Observation {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

fn unit(v: f64, scale: f64) -> f64 {
    (v / scale).clamp(-1.0, 1.0)
}

/// Horizontal distance and absolute height difference to the target.
pub(crate) fn planar_offsets(state: &VehicleState, target: &TargetSpec) -> (f64, f64) {
    let dx = target.location[0] - state.position[0];
    let dy = target.location[1] - state.position[1];
    ((dx * dx + dy * dy).sqrt(), (target.location[2] - state.position[2]).abs())
}

/// Elevation alignment in [0, 1]: 1 at equal height, 0 directly above/below.
pub(crate) fn elevation_alignment(d_xy: f64, dz: f64) -> f64 {
    1.0 - dz.atan2(d_xy).abs() / FRAC_PI_2
}

/// Six virtual target sensors. Each is a triangular gate on the bearing to
/// the target, scaled by proximity and elevation alignment; values lie in [0, 1].
pub fn compute_virtual_sensors(state: &VehicleState, target: &TargetSpec, config: &EnvConfig) -> [f64; 6] {
    let bearing = wrap_angle(target.heading_from(state.position) - state.yaw);
    let dist = state.distance_to(target.location);
    let prox = (1.0 - dist / config.diagonal()).max(0.0);
    let (d_xy, dz) = planar_offsets(state, target);
    let elev = elevation_alignment(d_xy, dz);

    let mut out = [0.0; 6];
    for (i, &center) in SENSOR_CENTERS.iter().enumerate() {
        let width = if i == 5 {
            config.sensor_back_half_width
        } else {
            config.sensor_half_width
        };
        let gate = (1.0 - wrap_angle(bearing - center).abs() / width).max(0.0);
        out[i] = (gate * prox * elev).clamp(0.0, 1.0);
    }
    out
}

/// Base vehicle state in the order roll-pitch-yaw first:
/// pitch, roll, yaw, their rates, position, velocity; all mapped into [-1, 1].
fn base_components(state: &VehicleState, config: &EnvConfig) -> [f64; 12] {
    let z_span = config.z_max - config.z_min;
    let z = ((state.position[2] - config.z_min) / z_span * 2.0 - 1.0).clamp(-1.0, 1.0);
    [
        unit(state.pitch, PI),
        unit(state.roll, PI),
        unit(state.yaw, PI),
        unit(state.pitch_rate, config.attitude_rate_scale),
        unit(state.roll_rate, config.attitude_rate_scale),
        unit(state.yaw_rate, MAX_YAW_RATE),
        unit(state.position[0], config.half_extent_x),
        unit(state.position[1], config.half_extent_y),
        z,
        unit(state.velocity[0], MAX_SPEED),
        unit(state.velocity[1], MAX_SPEED),
        unit(state.velocity[2], MAX_SPEED),
    ]
}

pub fn build_observation(state: &VehicleState, target: &TargetSpec, config: &EnvConfig) -> Observation {
    let mut values = base_components(state, config).to_vec();
    match config.obs_mode {
        ObsMode::Base => {}
        ObsMode::Tc => {
            let eta = target.heading_from(state.position);
            let z_span = config.z_max - config.z_min;
            values.push(unit(eta, PI));
            values.push(unit(target.location[0], config.half_extent_x));
            values.push(unit(target.location[1], config.half_extent_y));
            values.push(((target.location[2] - config.z_min) / z_span * 2.0 - 1.0).clamp(-1.0, 1.0));
        }
        ObsMode::Ts => values.extend_from_slice(&compute_virtual_sensors(state, target, config)),
    }
    Observation {
        mode: config.obs_mode,
        values,
    }
}
