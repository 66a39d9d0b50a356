use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::common::{action_cols, check_batch, join_cols, state_cols, widths, StateBatch, UpdateOutput, UpdateTrace};
use crate::error::Result;
use crate::nn::{polyak_update, split_head, squashed_sample, Activation, Adam, AdamConfig, Mlp, MlpSpec, Params, SquashedSample};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SacParams {
    pub gamma: f64,
    pub tau: f64,
    pub target_entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sac {
    /// Outputs the mean and log-std of the pre-squash Gaussian.
    pub actor: Mlp,
    pub critics: [Mlp; 2],
    pub critic_targets: [Mlp; 2],
    pub log_alpha: f64,
    actor_opt: Adam,
    critic_opts: [Adam; 2],
    alpha_opt: Adam,
    state_dim: usize,
    action_dim: usize,
}

/// Per-sample actor loss terms evaluated with fixed noise.
#[derive(Debug, Clone)]
pub struct ActorEval {
    pub loss: f64,
    pub grads: Params,
    pub log_prob: Array1<f64>,
}

impl Sac {
    pub fn new<R: Rng + ?Sized>(
        state_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        lrs: [f64; 3],
        init_alpha: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let [lr_actor, lr_critic, lr_alpha] = lrs;
        let actor = Mlp::new(MlpSpec::new(&widths(state_dim, hidden, 2 * action_dim)).with_gaussian_head(), rng)?;
        let cw = widths(state_dim + action_dim, hidden, 1);
        let critics = [
            Mlp::new(MlpSpec::new(&cw).with_output(Activation::Identity), rng)?,
            Mlp::new(MlpSpec::new(&cw).with_output(Activation::Identity), rng)?,
        ];
        let copt = AdamConfig::with_lr(lr_critic);
        Ok(Self {
            actor_opt: Adam::for_params(AdamConfig::with_lr(lr_actor), actor.params()),
            critic_opts: [Adam::for_params(copt, critics[0].params()), Adam::for_params(copt, critics[1].params())],
            alpha_opt: Adam::new(AdamConfig::with_lr(lr_alpha), &[1]),
            critic_targets: critics.clone(),
            actor,
            critics,
            log_alpha: init_alpha.ln(),
            state_dim,
            action_dim,
        })
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    /// Squashed policy sample for the given standard-normal noise.
    pub fn sample(&self, states: ArrayView2<f64>, noise: ArrayView2<f64>) -> Result<SquashedSample> {
        let out = self.actor.predict(states)?;
        let (mean, log_std) = split_head(&out);
        Ok(squashed_sample(mean, log_std, noise))
    }

    /// `tanh` of the Gaussian mean.
    pub fn act_deterministic(&self, states: ArrayView2<f64>) -> Result<Array2<f64>> {
        let out = self.actor.predict(states)?;
        Ok(split_head(&out).0.mapv(f64::tanh))
    }

    /// Soft double-Q target with next actions drawn from the current policy.
    pub fn targets(
        &self,
        rewards: ArrayView1<f64>,
        next_states: ArrayView2<f64>,
        terminals: ArrayView1<f64>,
        noise: ArrayView2<f64>,
        alpha: f64,
        gamma: f64,
    ) -> Result<Array1<f64>> {
        let next = self.sample(next_states, noise)?;
        let x = join_cols(next_states, next.action.view());
        let q1 = self.critic_targets[0].predict(x.view())?;
        let q2 = self.critic_targets[1].predict(x.view())?;
        let mut y = rewards.to_owned();
        for i in 0..y.len() {
            let soft = q1[[i, 0]].min(q2[[i, 0]]) - alpha * next.log_prob[i];
            y[i] += gamma * (1.0 - terminals[i]) * soft;
        }
        Ok(y)
    }

    /// `0.5 * sum_i mean (Q_i - y)^2` with per-critic gradients and the
    /// gradient with respect to the states.
    pub fn critic_loss_and_grads(
        &self,
        states: ArrayView2<f64>,
        actions: ArrayView2<f64>,
        y: ArrayView1<f64>,
    ) -> Result<(f64, [Params; 2], Array2<f64>)> {
        check_batch(states, y.len(), self.state_dim)?;
        check_batch(actions, y.len(), self.action_dim)?;
        let n = y.len() as f64;
        let x = join_cols(states, actions);
        let mut loss = 0.0;
        let mut d_states = Array2::zeros(states.raw_dim());
        let mut grads = Vec::with_capacity(2);
        for critic in &self.critics {
            let cache = critic.forward(x.view())?;
            let diff = &cache.output.column(0) - &y;
            loss += 0.5 * diff.mapv(|d| d * d).sum() / n;
            let d = (diff / n).insert_axis(Axis(1));
            let g = critic.backward(&cache, d.view())?;
            d_states += &state_cols(&g.input, self.state_dim);
            grads.push(g.params);
        }
        let g1 = grads.pop().unwrap();
        let g0 = grads.pop().unwrap();
        Ok((loss, [g0, g1], d_states))
    }

    /// `mean(alpha * log pi(a|s) - min_j Q_j(s, a))` with `a` reparameterized
    /// on `noise`; gradients reach the actor only.
    pub fn actor_loss_and_grads(&self, states: ArrayView2<f64>, noise: ArrayView2<f64>, alpha: f64) -> Result<ActorEval> {
        let n = states.nrows() as f64;
        let cache = self.actor.forward(states)?;
        let (mean, log_std) = split_head(&cache.output);
        let smp = squashed_sample(mean, log_std, noise);
        let x = join_cols(states, smp.action.view());
        let c0 = self.critics[0].forward(x.view())?;
        let c1 = self.critics[1].forward(x.view())?;

        let mut loss = 0.0;
        let mut d_q = [Array2::zeros((states.nrows(), 1)), Array2::zeros((states.nrows(), 1))];
        for i in 0..states.nrows() {
            let (q0, q1) = (c0.output[[i, 0]], c1.output[[i, 0]]);
            let pick = usize::from(q1 < q0);
            loss += alpha * smp.log_prob[i] - q0.min(q1);
            d_q[pick][[i, 0]] = -1.0 / n;
        }
        loss /= n;
        let g0 = self.critics[0].backward(&c0, d_q[0].view())?;
        let g1 = self.critics[1].backward(&c1, d_q[1].view())?;
        let d_action = action_cols(&g0.input, self.state_dim) + action_cols(&g1.input, self.state_dim);
        let d_log_prob = Array1::from_elem(states.nrows(), alpha / n);
        let (d_mean, d_log_std) = smp.backward(d_action.view(), d_log_prob.view());
        let d_out = crate::nn::join_head(&d_mean, &d_log_std);
        Ok(ActorEval {
            loss,
            grads: self.actor.backward(&cache, d_out.view())?.params,
            log_prob: smp.log_prob,
        })
    }

    /// `-log_alpha * mean(log_prob + target_entropy)` and its derivative.
    pub fn alpha_loss_and_grad(log_alpha: f64, log_prob: ArrayView1<f64>, target_entropy: f64) -> (f64, f64) {
        let m = log_prob.mean().unwrap_or(0.0) + target_entropy;
        (-log_alpha * m, -m)
    }

    pub fn update<R: Rng + ?Sized>(
        &mut self,
        batch: &StateBatch,
        actions: ArrayView2<f64>,
        p: &SacParams,
        rng: &mut R,
        mut trace: Option<&mut UpdateTrace>,
    ) -> Result<UpdateOutput> {
        let n = batch.states.nrows();
        let normal = |rng: &mut R| Array2::from_shape_fn((n, self.action_dim), |_| rng.sample::<f64, _>(StandardNormal));
        let pi_noise = normal(rng);
        let next_noise = normal(rng);

        // the entropy coefficient in use this step is the one before its update
        let alpha = self.alpha();
        let log_prob = self.sample(batch.states, pi_noise.view())?.log_prob;
        let (alpha_loss, d_log_alpha) = Self::alpha_loss_and_grad(self.log_alpha, log_prob.view(), p.target_entropy);
        let mut la = [self.log_alpha];
        self.alpha_opt.update(vec![&mut la[..]], vec![&[d_log_alpha][..]])?;
        self.log_alpha = la[0];

        let y = self.targets(batch.rewards, batch.next_states, batch.terminals, next_noise.view(), alpha, p.gamma)?;
        let (critic_loss, [g0, g1], d_states) = self.critic_loss_and_grads(batch.states, actions, y.view())?;
        if let Some(t) = trace.as_deref_mut() {
            t.critic_states = Some(batch.states.to_owned());
        }
        self.critic_opts[0].step_mlp(&mut self.critics[0], &g0)?;
        self.critic_opts[1].step_mlp(&mut self.critics[1], &g1)?;

        let actor = self.actor_loss_and_grads(batch.states, pi_noise.view(), alpha)?;
        if let Some(t) = trace {
            t.actor_states = Some(batch.states.to_owned());
        }
        self.actor_opt.step_mlp(&mut self.actor, &actor.grads)?;

        for (t, o) in self.critic_targets.iter_mut().zip(&self.critics) {
            polyak_update(t.params_mut(), o.params(), p.tau)?;
        }
        Ok(UpdateOutput {
            critic_loss,
            actor_loss: Some(actor.loss),
            alpha_loss: Some(alpha_loss),
            d_states,
        })
    }
}
