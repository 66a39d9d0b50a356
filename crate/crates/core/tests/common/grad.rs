//! Gradient checks of every training loss: each entry draws at least
//! `TRIALS` smooth random instances and returns the worst relative error.

use ndarray::{s, Array1, Array2, Axis};
use ogn_core::rl::{Dqn, Sac, Td3};
use ogn_core::srl::{infonce_loss, kl_diag_gaussian, l2_loss, SrlConfig, SrlModels, SrlVariant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

pub const TRIALS: usize = 100;
const N: usize = 4;
const S: usize = 3;
const A: usize = 2;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn targets(r: &mut ChaCha8Rng) -> Array1<f64> {
    (0..N).map(|_| r.random_range(-2.0..2.0)).collect()
}

pub fn dqn_td_loss() -> f64 {
    run_trials(&mut rng(1), TRIALS, |r| {
        let dqn = Dqn::new(S, 5, &[6, 5], 1e-3, r).unwrap();
        let s = uniform(r, N, S, 1.0);
        let acts: Vec<usize> = (0..N).map(|_| r.random_range(0..5)).collect();
        let y = targets(r);
        let loss = |d: &Dqn, x: &Array2<f64>| d.loss_and_grads(x.view(), &acts, y.view()).unwrap().0;
        let (_, g) = dqn.loss_and_grads(s.view(), &acts, y.view()).unwrap();
        vec![
            score(&g.params.to_flat(), &param_grad(&dqn, |d| &mut d.q, |d| loss(d, &s))),
            score(&flat(&g.input), &input_grad(&s, |x| loss(&dqn, x))),
        ]
    })
}

pub fn td3_critic_loss() -> f64 {
    run_trials(&mut rng(2), TRIALS, |r| {
        let td3 = Td3::new(S, A, &[6, 5], 1e-3, 1e-3, r).unwrap();
        let s = uniform(r, N, S, 1.0);
        let a = uniform(r, N, A, 1.0);
        let y = targets(r);
        let loss = |t: &Td3, x: &Array2<f64>| t.critic_loss_and_grads(x.view(), a.view(), y.view()).unwrap().0;
        let (_, [g0, g1], ds) = td3.critic_loss_and_grads(s.view(), a.view(), y.view()).unwrap();
        vec![
            score(&g0.to_flat(), &param_grad(&td3, |t| &mut t.critics[0], |t| loss(t, &s))),
            score(&g1.to_flat(), &param_grad(&td3, |t| &mut t.critics[1], |t| loss(t, &s))),
            score(&flat(&ds), &input_grad(&s, |x| loss(&td3, x))),
        ]
    })
}

pub fn td3_actor_loss() -> f64 {
    run_trials(&mut rng(3), TRIALS, |r| {
        let td3 = Td3::new(S, A, &[6, 5], 1e-3, 1e-3, r).unwrap();
        let s = uniform(r, N, S, 1.0);
        let (_, g) = td3.actor_loss_and_grads(s.view()).unwrap();
        let fd = param_grad(&td3, |t| &mut t.actor, |t| t.actor_loss_and_grads(s.view()).unwrap().0);
        vec![score(&g.to_flat(), &fd)]
    })
}

pub fn sac_critic_loss() -> f64 {
    run_trials(&mut rng(4), TRIALS, |r| {
        let sac = Sac::new(S, A, &[6, 5], [3e-3; 3], 1.0, r).unwrap();
        let s = uniform(r, N, S, 1.0);
        let a = uniform(r, N, A, 1.0);
        let y = targets(r);
        let loss = |t: &Sac, x: &Array2<f64>| t.critic_loss_and_grads(x.view(), a.view(), y.view()).unwrap().0;
        let (_, [g0, g1], ds) = sac.critic_loss_and_grads(s.view(), a.view(), y.view()).unwrap();
        vec![
            score(&g0.to_flat(), &param_grad(&sac, |t| &mut t.critics[0], |t| loss(t, &s))),
            score(&g1.to_flat(), &param_grad(&sac, |t| &mut t.critics[1], |t| loss(t, &s))),
            score(&flat(&ds), &input_grad(&s, |x| loss(&sac, x))),
        ]
    })
}

pub fn sac_actor_loss() -> f64 {
    run_trials(&mut rng(5), TRIALS, |r| {
        let sac = Sac::new(S, A, &[6, 5], [3e-3; 3], 1.0, r).unwrap();
        let s = uniform(r, N, S, 1.0);
        let noise = normal(r, N, A);
        let alpha = r.random_range(0.05..1.5);
        let eval = sac.actor_loss_and_grads(s.view(), noise.view(), alpha).unwrap();
        let fd = param_grad(
            &sac,
            |t| &mut t.actor,
            |t| t.actor_loss_and_grads(s.view(), noise.view(), alpha).unwrap().loss,
        );
        vec![score(&eval.grads.to_flat(), &fd)]
    })
}

pub fn sac_temperature_loss() -> f64 {
    run_trials(&mut rng(6), TRIALS, |r| {
        let log_prob: Array1<f64> = (0..N).map(|_| r.random_range(-4.0..4.0)).collect();
        let log_alpha = r.random_range(-3.0..1.0);
        let target = -(A as f64);
        let (_, d) = Sac::alpha_loss_and_grad(log_alpha, log_prob.view(), target);
        let fd = central(1, |_, h| Sac::alpha_loss_and_grad(log_alpha + h, log_prob.view(), target).0);
        vec![score(&[d], &fd)]
    })
}

pub fn infonce_prediction_gradient() -> f64 {
    run_trials(&mut rng(7), TRIALS, |r| {
        let n = r.random_range(2..6);
        let p = uniform(r, n, 4, 1.0);
        let z = uniform(r, n, 4, 1.0);
        let t = r.random_range(0.1..1.0);
        let (_, g) = infonce_loss(p.view(), z.view(), t).unwrap();
        vec![score(&flat(&g), &input_grad(&p, |x| infonce_loss(x.view(), z.view(), t).unwrap().0))]
    })
}

pub fn kl_prediction_gradient() -> f64 {
    run_trials(&mut rng(8), TRIALS, |r| {
        let [pm, ps, qm, qs] = [(); 4].map(|_| uniform(r, N, 3, 1.0));
        let kl = |m: &Array2<f64>, l: &Array2<f64>| kl_diag_gaussian(pm.view(), ps.view(), m.view(), l.view()).unwrap().0;
        let (_, dm, ds) = kl_diag_gaussian(pm.view(), ps.view(), qm.view(), qs.view()).unwrap();
        vec![
            score(&flat(&dm), &input_grad(&qm, |x| kl(x, &qs))),
            score(&flat(&ds), &input_grad(&qs, |x| kl(&qm, x))),
        ]
    })
}

pub fn l2_prediction_gradient() -> f64 {
    run_trials(&mut rng(9), TRIALS, |r| {
        let p = uniform(r, N, 5, 1.0);
        let z = uniform(r, N, 5, 1.0);
        let (_, g) = l2_loss(p.view(), z.view()).unwrap();
        vec![score(&flat(&g), &input_grad(&p, |x| l2_loss(x.view(), z.view()).unwrap().0))]
    })
}

fn small_srl(variant: SrlVariant, r: &mut ChaCha8Rng) -> SrlModels {
    let cfg = SrlConfig {
        variant,
        latent_dim: 8,
        hidden: 8,
        temperature: 0.5,
        ..SrlConfig::default()
    };
    let mut m = SrlModels::new(cfg, S, A, r).unwrap();
    // move the target branch away from the online one
    for s in m.target_encoder.params_mut().slices_mut() {
        s.iter_mut().for_each(|v| *v += r.random_range(-0.1..0.1));
    }
    m
}

/// Predictive loss through projection, transition and the code, then down
/// the encoder, with the target codes held fixed.
pub fn predictive_loss_through_models() -> f64 {
    let variants = [SrlVariant::Det, SrlVariant::Sto, SrlVariant::L2Online];
    let mut i = 0;
    run_trials(&mut rng(10), TRIALS, |r| {
        let m = small_srl(variants[i % 3], r);
        i += 1;
        let obs = uniform(r, N, S, 1.0);
        let next = uniform(r, N, S, 1.0);
        let acts = uniform(r, N, A, 1.0);
        let noise = normal(r, N, 8);
        let target = m.target_codes(next.view()).unwrap();
        let enc = m.encode(obs.view(), Some(noise.view())).unwrap();
        let eval = m.spr_loss_and_grads(enc.z.view(), acts.view(), &target).unwrap();
        let loss_z = |mm: &SrlModels, z: &Array2<f64>| mm.spr_loss_and_grads(z.view(), acts.view(), &target).unwrap().loss;
        let g_enc = m.encoder_grads(&enc, eval.d_z.view()).unwrap();
        let enc_fd = param_grad(
            &m,
            |x| &mut x.encoder,
            |x| loss_z(x, &x.encode(obs.view(), Some(noise.view())).unwrap().z),
        );
        vec![
            score(&eval.transition.to_flat(), &param_grad(&m, |x| &mut x.transition, |x| loss_z(x, &enc.z))),
            score(&eval.projection.to_flat(), &param_grad(&m, |x| &mut x.projection, |x| loss_z(x, &enc.z))),
            score(&flat(&eval.d_z), &input_grad(&enc.z, |z| loss_z(&m, z))),
            score(&g_enc.to_flat(), &enc_fd),
        ]
    })
}

/// Gradient of a linear functional of the next-code prediction with
/// respect to the current code.
pub fn prediction_wrt_code() -> f64 {
    run_trials(&mut rng(11), TRIALS, |r| {
        let m = small_srl(SrlVariant::Det, r);
        let l = m.config.latent_dim;
        let z = uniform(r, N, l, 0.9);
        let a = uniform(r, N, A, 1.0);
        let w = uniform(r, N, l, 1.0);
        let obj = |z: &Array2<f64>| (&m.predict_next(z.view(), a.view()).unwrap() * &w).sum();
        let x = ndarray::concatenate(Axis(1), &[z.view(), a.view()]).unwrap();
        let tc = m.transition.forward(x.view()).unwrap();
        let pc = m.projection.forward(tc.output.view()).unwrap();
        let gp = m.projection.backward(&pc, w.view()).unwrap();
        let gt = m.transition.backward(&tc, gp.input.view()).unwrap();
        let dz = gt.input.slice(s![.., ..l]).to_owned();
        vec![score(&flat(&dz), &input_grad(&z, obj))]
    })
}

/// Every check with its name.
pub const SUITE: [(&str, fn() -> f64); 11] = [
    ("dqn td", dqn_td_loss),
    ("td3 critic", td3_critic_loss),
    ("td3 actor", td3_actor_loss),
    ("sac critic", sac_critic_loss),
    ("sac actor", sac_actor_loss),
    ("sac temperature", sac_temperature_loss),
    ("infonce", infonce_prediction_gradient),
    ("kl", kl_prediction_gradient),
    ("l2", l2_prediction_gradient),
    ("predictive chain", predictive_loss_through_models),
    ("prediction wrt code", prediction_wrt_code),
];
