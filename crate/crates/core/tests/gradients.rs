//! Analytic gradients of every training loss against central differences.

mod common;

use common::grad;
use common::*;
use ogn_core::rl::Dqn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check(worst: f64) {
    assert!(worst < TOL, "worst relative error {worst:e}");
}

#[test]
fn dqn_td_loss() {
    check(grad::dqn_td_loss());
}

#[test]
fn td3_critic_loss() {
    check(grad::td3_critic_loss());
}

#[test]
fn td3_actor_loss() {
    check(grad::td3_actor_loss());
}

#[test]
fn sac_critic_loss() {
    check(grad::sac_critic_loss());
}

#[test]
fn sac_actor_loss() {
    check(grad::sac_actor_loss());
}

#[test]
fn sac_temperature_loss() {
    check(grad::sac_temperature_loss());
}

#[test]
fn infonce_prediction_gradient() {
    check(grad::infonce_prediction_gradient());
}

#[test]
fn kl_prediction_gradient() {
    check(grad::kl_prediction_gradient());
}

#[test]
fn l2_prediction_gradient() {
    check(grad::l2_prediction_gradient());
}

#[test]
fn predictive_loss_through_models() {
    check(grad::predictive_loss_through_models());
}

#[test]
fn prediction_wrt_code() {
    check(grad::prediction_wrt_code());
}

/// The oracle must notice a gradient that is off by one part in a thousand.
#[test]
fn oracle_rejects_scaled_gradient() {
    let mut r = ChaCha8Rng::seed_from_u64(12);
    let dqn = Dqn::new(3, 5, &[6, 5], 1e-3, &mut r).unwrap();
    let s = uniform(&mut r, 4, 3, 1.0);
    let acts = [0, 1, 2, 3];
    let y: ndarray::Array1<f64> = ndarray::arr1(&[0.5, -1.0, 2.0, 0.0]);
    let (_, g) = dqn.loss_and_grads(s.view(), &acts, y.view()).unwrap();
    let fd = param_grad(&dqn, |d| &mut d.q, |d| d.loss_and_grads(s.view(), &acts, y.view()).unwrap().0);
    let scaled: Vec<f64> = g.params.to_flat().iter().map(|v| v * 1.001).collect();
    assert!(score(&g.params.to_flat(), &fd).unwrap() < TOL);
    assert!(score(&scaled, &fd).unwrap() > TOL);
}
