//! Kinematic stand-in for the onboard velocity controller.
//!
//! The commanded body-frame velocity is rotated into the world frame and the
//! actual velocity follows it with a first-order lag. Roll and pitch are not
//! dynamic states here; they are emulated from the body-frame horizontal
//! acceleration so the attitude channels of the observation carry signal.

use super::config::EnvConfig;
use super::state::{wrap_angle, ActionCommand, VehicleState};

/// Advance `state` by one physics substep of length `dt` under `cmd`.
pub fn integrate_kinematics(state: &VehicleState, cmd: ActionCommand, dt: f64, config: &EnvConfig) -> VehicleState {
    let cmd = cmd.clamped();
    let (s, c) = state.yaw.sin_cos();

    let target_vel = [c * cmd.vx - s * cmd.vy, s * cmd.vx + c * cmd.vy, cmd.vz];
    let blend = if config.velocity_lag > 0.0 {
        (dt / config.velocity_lag).min(1.0)
    } else {
        1.0
    };

    let mut velocity = [0.0; 3];
    for i in 0..3 {
        velocity[i] = state.velocity[i] + (target_vel[i] - state.velocity[i]) * blend;
    }

    // body-frame horizontal acceleration drives the emulated tilt
    let ax = (velocity[0] - state.velocity[0]) / dt;
    let ay = (velocity[1] - state.velocity[1]) / dt;
    let body_ax = c * ax + s * ay;
    let body_ay = -s * ax + c * ay;
    let lim = config.attitude_limit;
    let pitch = (config.attitude_gain * body_ax).clamp(-lim, lim);
    let roll = (-config.attitude_gain * body_ay).clamp(-lim, lim);

    let mut position = state.position;
    for i in 0..3 {
        position[i] += velocity[i] * dt;
    }

    VehicleState {
        position,
        velocity,
        roll: wrap_angle(roll),
        pitch: wrap_angle(pitch),
        yaw: wrap_angle(state.yaw + cmd.yaw_rate * dt),
        roll_rate: (roll - state.roll) / dt,
        pitch_rate: (pitch - state.pitch) / dt,
        yaw_rate: cmd.yaw_rate,
    }
}
