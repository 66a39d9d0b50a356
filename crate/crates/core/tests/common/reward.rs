//! Reward checks shared by the environment tests and the acceptance run.

use std::f64::consts::{FRAC_PI_2, PI};

use ogn_core::env::{compute_reward, Env, EnvAction, EnvConfig, PoseTerms, RewardEvents, TargetSpec, VehicleState, NUM_DISCRETE_ACTIONS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scalar reward written from the definitions, independent of the crate.
pub struct Scalar {
    pub d_g: f64,
}

impl Scalar {
    pub fn terms(&self, p: [f64; 3], yaw: f64, t: [f64; 3]) -> (f64, f64, f64) {
        let (dx, dy, dz) = (t[0] - p[0], t[1] - p[1], t[2] - p[2]);
        let dist = (dx * dx + dy * dy + dz * dz).sqrt();
        let r_dist = -(1.0 - dist / self.d_g).abs();
        let mut err = yaw - dy.atan2(dx);
        while err > PI {
            err -= 2.0 * PI;
        }
        while err < -PI {
            err += 2.0 * PI;
        }
        let r_ori = -err.abs() / PI;
        let r_elev = -(dz.abs().atan2((dx * dx + dy * dy).sqrt())) / FRAC_PI_2;
        (r_dist, r_ori, r_elev)
    }

    pub fn total(&self, prev: [f64; 3], next: [f64; 3], yaw: f64, t: [f64; 3], dt: f64) -> f64 {
        let d = |p: [f64; 3]| ((t[0] - p[0]).powi(2) + (t[1] - p[1]).powi(2) + (t[2] - p[2]).powi(2)).sqrt();
        let (a, b, c) = self.terms(next, yaw, t);
        let success = if (1.0 + a.max(-1.0)) * (1.0 + b) * (1.0 + c) > 0.95 { 10.0 } else { 0.0 };
        (d(prev) - d(next)) / dt + 0.1 * (a + b + c) + success
    }
}

pub fn spec(location: [f64; 3]) -> TargetSpec {
    TargetSpec {
        location,
        orientation: 0.0,
        index: 0,
    }
}

/// Position at distance `dist` from `t` along heading `bearing`, level.
pub fn around(t: [f64; 3], dist: f64, bearing: f64) -> [f64; 3] {
    [t[0] - dist * bearing.cos(), t[1] - dist * bearing.sin(), t[2]]
}

/// Total reward of a hand-worked step; should be 0.27.
pub fn hand_evaluated_total() -> f64 {
    let cfg = EnvConfig::default();
    let t = [0.0, 0.95, 1.025];
    let dt = 0.2;
    let next = VehicleState::at_rest(around(t, 0.42, 0.3), 0.3 + 0.1 * PI);
    let prev = VehicleState::at_rest(around(t, 0.42 + 0.3 * dt, 0.3), 0.0);
    compute_reward(&prev, &next, &spec(t), dt, RewardEvents::default(), &cfg).r_total
}

/// Worst deviation of the total reward from [`Scalar`] over 2000 random
/// states, half of them near the goal ring, and the number of successes.
pub fn scalar_reference_worst() -> (f64, usize) {
    let cfg = EnvConfig::default();
    let oracle = Scalar { d_g: cfg.d_g() };
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let mut successes = 0;
    let mut worst: f64 = 0.0;
    for i in 0..2000 {
        let t = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(0.5..1.6)];
        let next_p = if i % 2 == 0 {
            around(t, cfg.d_g() + r.random_range(-0.03..0.03), r.random_range(-PI..PI))
        } else {
            [r.random_range(-1.1..1.1), r.random_range(-1.1..1.1), r.random_range(0.0..2.0)]
        };
        let yaw = if i % 2 == 0 {
            (t[1] - next_p[1]).atan2(t[0] - next_p[0]) + r.random_range(-0.1..0.1)
        } else {
            r.random_range(-PI..PI)
        };
        let prev_p = [next_p[0] + r.random_range(-0.05..0.05), next_p[1] + r.random_range(-0.05..0.05), next_p[2]];
        let dt = r.random_range(0.1..0.25);
        let got = compute_reward(
            &VehicleState::at_rest(prev_p, 0.0),
            &VehicleState::at_rest(next_p, yaw),
            &spec(t),
            dt,
            RewardEvents::default(),
            &cfg,
        );
        let (a, b, c) = oracle.terms(next_p, yaw, t);
        worst = worst
            .max((got.r_total - oracle.total(prev_p, next_p, yaw, t, dt)).abs())
            .max((got.r_dist - a).abs())
            .max((got.r_ori - b).abs())
            .max((got.r_elev - c).abs());
        successes += (got.r_success > 0.0) as usize;
    }
    (worst, successes)
}

/// Goal scores of two poses straddling the threshold: factors 0.97 * 0.99
/// and 0.96 * 0.98, with each single factor above 0.95 in both.
pub fn product_predicate() -> [PoseTerms; 2] {
    let cfg = EnvConfig::default();
    let t = [0.95, 0.0, 1.0];
    let pose = |dist_err: f64, ori: f64| {
        let p = around(t, cfg.d_g() * (1.0 + dist_err), 0.0);
        PoseTerms::evaluate(&VehicleState::at_rest(p, ori * PI), &spec(t), &cfg)
    };
    [pose(0.03, 0.01), pose(0.04, 0.02)]
}

/// Summed velocity reward times step duration against the net change in
/// distance, worst over 20 random-action runs.
pub fn telescoping_worst() -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for run in 0..20 {
        let mut env = Env::new(EnvConfig::default()).unwrap();
        env.reset(run, None).unwrap();
        let target = env.target().location;
        let d0 = env.state().distance_to(target);
        let mut acc = 0.0;
        loop {
            let a = EnvAction::Discrete(r.random_range(0..NUM_DISCRETE_ACTIONS));
            let step = env.step(a).unwrap();
            acc += step.reward.r_vel * step.info.dt;
            if step.terminal {
                break;
            }
        }
        worst = worst.max((acc - (d0 - env.state().distance_to(target))).abs());
    }
    worst
}
