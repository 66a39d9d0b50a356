use serde::{Deserialize, Serialize};

use crate::env::{EnvConfig, TargetSpec, TerminalCause};
use crate::error::{Error, Result};

/// Outcome of one evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Method label, for example `td3` or `td3-sto`.
    pub method: String,
    pub seed: u64,
    /// Training chunk the evaluated checkpoint was written after.
    pub checkpoint: u32,
    pub target: usize,
    pub trial: u32,
    pub cumulative_reward: f64,
    pub success: bool,
    pub terminal_cause: TerminalCause,
    /// Arc length flown, meters.
    pub path_length: f64,
    /// Straight-line distance from the start to the goal ring, meters.
    pub shortest_path: f64,
    pub final_distance: f64,
    pub r_dist: f64,
    pub r_ori: f64,
    pub r_elev: f64,
    pub steps: u32,
    pub elapsed: f64,
}

/// Straight-line distance from `start` to the nearest point of the target's
/// goal ring: the horizontal circle of radius `D_g` at the target height.
pub fn shortest_path(start: [f64; 3], target: &TargetSpec, config: &EnvConfig) -> f64 {
    let dx = target.location[0] - start[0];
    let dy = target.location[1] - start[1];
    let dz = target.location[2] - start[2];
    let radial = (dx * dx + dy * dy).sqrt() - config.d_g();
    (radial * radial + dz * dz).sqrt()
}

/// Distance left to the goal ring at the end of a run; zero on success.
pub fn dts(final_distance: f64, success: bool, d_g: f64, tolerance: f64) -> f64 {
    if success {
        return 0.0;
    }
    ((final_distance - d_g).abs() - tolerance).max(0.0)
}

pub fn trial_dts(t: &TrialRecord, d_g: f64, tolerance: f64) -> f64 {
    dts(t.final_distance, t.success, d_g, tolerance)
}

/// Success weighted by path efficiency, averaged over trials.
pub fn spl(trials: &[TrialRecord]) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::Metric("path efficiency of an empty trial set".into()));
    }
    let mut total = 0.0;
    for t in trials {
        if !(t.shortest_path > 0.0) {
            return Err(Error::Metric(format!("trial {} has a non-positive shortest path", t.trial)));
        }
        if t.success {
            total += t.shortest_path / t.path_length.max(t.shortest_path);
        }
    }
    Ok(total / trials.len() as f64)
}

pub fn success_rate(trials: &[TrialRecord]) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::Metric("success rate of an empty trial set".into()));
    }
    Ok(trials.iter().filter(|t| t.success).count() as f64 / trials.len() as f64)
}
