use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Zip};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::common::{action_cols, build, check_batch, join_cols, mse, state_cols, widths, StateBatch, UpdateOutput, UpdateTrace};
use crate::error::Result;
use crate::nn::{polyak_update, Activation, Adam, AdamConfig, Mlp, Params};

/// Hyperparameters the TD3 update reads on every call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Td3Params {
    pub gamma: f64,
    pub tau: f64,
    pub target_noise: f64,
    pub target_noise_clip: f64,
    pub policy_delay: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Td3 {
    pub actor: Mlp,
    pub actor_target: Mlp,
    pub critics: [Mlp; 2],
    pub critic_targets: [Mlp; 2],
    actor_opt: Adam,
    critic_opts: [Adam; 2],
    state_dim: usize,
    action_dim: usize,
    updates: u64,
}

impl Td3 {
    pub fn new<R: Rng + ?Sized>(
        state_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        lr_actor: f64,
        lr_critic: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let actor = build(widths(state_dim, hidden, action_dim), Activation::Tanh, rng)?;
        let cw = widths(state_dim + action_dim, hidden, 1);
        let critics = [build(cw.clone(), Activation::Identity, rng)?, build(cw, Activation::Identity, rng)?];
        let copt = AdamConfig::with_lr(lr_critic);
        Ok(Self {
            actor_opt: Adam::for_params(AdamConfig::with_lr(lr_actor), actor.params()),
            critic_opts: [Adam::for_params(copt, critics[0].params()), Adam::for_params(copt, critics[1].params())],
            actor_target: actor.clone(),
            critic_targets: critics.clone(),
            actor,
            critics,
            state_dim,
            action_dim,
            updates: 0,
        })
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Deterministic policy output in [-1, 1].
    pub fn act(&self, states: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.actor.predict(states)
    }

    /// Clipped double-Q target with smoothed target actions. `noise` is
    /// raw N(0, sigma) noise; it is clipped to `clip` here.
    pub fn targets(
        &self,
        rewards: ArrayView1<f64>,
        next_states: ArrayView2<f64>,
        terminals: ArrayView1<f64>,
        noise: ArrayView2<f64>,
        clip: f64,
        gamma: f64,
    ) -> Result<Array1<f64>> {
        let mut next_a = self.actor_target.predict(next_states)?;
        Zip::from(&mut next_a)
            .and(&noise)
            .for_each(|a, &n| *a = (*a + n.clamp(-clip, clip)).clamp(-1.0, 1.0));
        let x = join_cols(next_states, next_a.view());
        let q1 = self.critic_targets[0].predict(x.view())?;
        let q2 = self.critic_targets[1].predict(x.view())?;
        let mut y = rewards.to_owned();
        for i in 0..y.len() {
            y[i] += gamma * (1.0 - terminals[i]) * q1[[i, 0]].min(q2[[i, 0]]);
        }
        Ok(y)
    }

    /// Sum of both critics' squared errors, per-critic parameter gradients
    /// and the gradient with respect to the states.
    pub fn critic_loss_and_grads(
        &self,
        states: ArrayView2<f64>,
        actions: ArrayView2<f64>,
        y: ArrayView1<f64>,
    ) -> Result<(f64, [Params; 2], Array2<f64>)> {
        check_batch(states, y.len(), self.state_dim)?;
        check_batch(actions, y.len(), self.action_dim)?;
        let x = join_cols(states, actions);
        let mut loss = 0.0;
        let mut d_states = Array2::zeros(states.raw_dim());
        let mut grads = Vec::with_capacity(2);
        for critic in &self.critics {
            let cache = critic.forward(x.view())?;
            let (l, d) = mse(cache.output.column(0), y);
            loss += l;
            let g = critic.backward(&cache, d.insert_axis(ndarray::Axis(1)).view())?;
            d_states += &state_cols(&g.input, self.state_dim);
            grads.push(g.params);
        }
        let g1 = grads.pop().unwrap();
        let g0 = grads.pop().unwrap();
        Ok((loss, [g0, g1], d_states))
    }

    /// `-mean Q1(s, pi(s))` and its gradient with respect to the actor.
    pub fn actor_loss_and_grads(&self, states: ArrayView2<f64>) -> Result<(f64, Params)> {
        let n = states.nrows() as f64;
        let a_cache = self.actor.forward(states)?;
        let x = join_cols(states, a_cache.output.view());
        let q_cache = self.critics[0].forward(x.view())?;
        let loss = -q_cache.output.sum() / n;
        let d_q = Array2::from_elem(q_cache.output.raw_dim(), -1.0 / n);
        let qg = self.critics[0].backward(&q_cache, d_q.view())?;
        let d_a = action_cols(&qg.input, self.state_dim);
        Ok((loss, self.actor.backward(&a_cache, d_a.view())?.params))
    }

    pub fn update<R: Rng + ?Sized>(
        &mut self,
        batch: &StateBatch,
        actions: ArrayView2<f64>,
        p: &Td3Params,
        rng: &mut R,
        mut trace: Option<&mut UpdateTrace>,
    ) -> Result<UpdateOutput> {
        let n = batch.states.nrows();
        let noise = Array2::from_shape_fn((n, self.action_dim), |_| rng.sample::<f64, _>(StandardNormal) * p.target_noise);
        let y = self.targets(batch.rewards, batch.next_states, batch.terminals, noise.view(), p.target_noise_clip, p.gamma)?;
        let (critic_loss, [g0, g1], d_states) = self.critic_loss_and_grads(batch.states, actions, y.view())?;
        if let Some(t) = trace.as_deref_mut() {
            t.critic_states = Some(batch.states.to_owned());
        }
        self.critic_opts[0].step_mlp(&mut self.critics[0], &g0)?;
        self.critic_opts[1].step_mlp(&mut self.critics[1], &g1)?;
        self.updates += 1;

        let mut actor_loss = None;
        if self.updates % p.policy_delay == 0 {
            let (l, g) = self.actor_loss_and_grads(batch.states)?;
            if let Some(t) = trace {
                t.actor_states = Some(batch.states.to_owned());
            }
            self.actor_opt.step_mlp(&mut self.actor, &g)?;
            actor_loss = Some(l);
            polyak_update(self.actor_target.params_mut(), self.actor.params(), p.tau)?;
            for (t, o) in self.critic_targets.iter_mut().zip(&self.critics) {
                polyak_update(t.params_mut(), o.params(), p.tau)?;
            }
        }
        Ok(UpdateOutput {
            critic_loss,
            actor_loss,
            alpha_loss: None,
            d_states,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn net() -> Td3 {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        Td3::new(3, 2, &[8, 8], 1e-3, 1e-3, &mut rng).unwrap()
    }

    #[test]
    fn identical_critics_zero_noise() {
        let mut td3 = net();
        td3.critic_targets[1] = td3.critic_targets[0].clone();
        let s = array![[0.1, 0.2, 0.3]];
        let y = td3
            .targets(array![0.5].view(), s.view(), array![0.0].view(), Array2::zeros((1, 2)).view(), 0.5, 0.9)
            .unwrap();
        let a = td3.actor_target.predict(s.view()).unwrap();
        let q = td3.critic_targets[0].predict(join_cols(s.view(), a.view()).view()).unwrap();
        assert!((y[0] - (0.5 + 0.9 * q[[0, 0]])).abs() < 1e-14);
    }

    #[test]
    fn large_noise_is_clipped() {
        let td3 = net();
        let s = array![[0.1, 0.2, 0.3]];
        let big = Array2::from_elem((1, 2), 10.0 * 0.2);
        let clipped = Array2::from_elem((1, 2), 0.5);
        let r = array![0.0];
        let d = array![0.0];
        let y1 = td3.targets(r.view(), s.view(), d.view(), big.view(), 0.5, 0.99).unwrap();
        let y2 = td3.targets(r.view(), s.view(), d.view(), clipped.view(), 0.5, 0.99).unwrap();
        assert_eq!(y1, y2);
    }

    #[test]
    fn critic_loss_zero_at_fixed_point() {
        let mut td3 = net();
        td3.critics[1] = td3.critics[0].clone();
        let s = array![[0.1, 0.2, 0.3], [-0.3, 0.0, 0.4]];
        let a = array![[0.5, -0.5], [0.1, 0.9]];
        let y = td3.critics[0].predict(join_cols(s.view(), a.view()).view()).unwrap().column(0).to_owned();
        let (loss, g, ds) = td3.critic_loss_and_grads(s.view(), a.view(), y.view()).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g[0].to_flat().iter().chain(ds.iter()).all(|&v| v == 0.0));
    }

    #[test]
    fn terminal_means_no_bootstrap() {
        let td3 = net();
        let s = array![[0.1, 0.2, 0.3]];
        let y = td3
            .targets(array![0.7].view(), s.view(), array![1.0].view(), Array2::zeros((1, 2)).view(), 0.5, 0.99)
            .unwrap();
        assert_eq!(y[0], 0.7);
    }

    #[test]
    fn policy_delay_gates_actor() {
        let mut td3 = net();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = array![[0.1, 0.2, 0.3], [-0.3, 0.0, 0.4]];
        let a = array![[0.5, -0.5], [0.1, 0.9]];
        let r = array![1.0, 0.0];
        let d = array![0.0, 1.0];
        let b = StateBatch {
            states: s.view(),
            next_states: s.view(),
            rewards: r.view(),
            terminals: d.view(),
        };
        let p = Td3Params {
            gamma: 0.99,
            tau: 0.005,
            target_noise: 0.2,
            target_noise_clip: 0.5,
            policy_delay: 2,
        };
        let actor0 = td3.actor.clone();
        let target0 = td3.critic_targets[0].clone();
        let o1 = td3.update(&b, a.view(), &p, &mut rng, None).unwrap();
        assert!(o1.actor_loss.is_none());
        assert_eq!(td3.actor.params(), actor0.params());
        assert_eq!(td3.critic_targets[0], target0);
        let o2 = td3.update(&b, a.view(), &p, &mut rng, None).unwrap();
        assert!(o2.actor_loss.is_some());
        assert_ne!(td3.actor.params(), actor0.params());
        assert_ne!(td3.critic_targets[0], target0);
    }
}
