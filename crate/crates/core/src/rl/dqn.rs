use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::common::{build, check_batch, mse, widths, StateBatch, UpdateOutput, UpdateTrace};
use crate::error::{Error, Result};
use crate::nn::{polyak_update, Activation, Adam, AdamConfig, Gradients, Mlp};

/// `y = r + gamma * max_a Q'(s', a)`, without bootstrap on terminals.
pub fn dqn_target(
    rewards: ArrayView1<f64>,
    max_next_q: ArrayView1<f64>,
    terminals: ArrayView1<f64>,
    gamma: f64,
) -> Array1<f64> {
    let mut y = rewards.to_owned();
    for i in 0..y.len() {
        y[i] += gamma * (1.0 - terminals[i]) * max_next_q[i];
    }
    y
}

/// Index of the largest value, first one on ties.
pub fn argmax(row: ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dqn {
    pub q: Mlp,
    pub q_target: Mlp,
    opt: Adam,
    state_dim: usize,
    n_actions: usize,
}

impl Dqn {
    pub fn new<R: Rng + ?Sized>(state_dim: usize, n_actions: usize, hidden: &[usize], lr: f64, rng: &mut R) -> Result<Self> {
        let q = build(widths(state_dim, hidden, n_actions), Activation::Identity, rng)?;
        let opt = Adam::for_params(AdamConfig::with_lr(lr), q.params());
        Ok(Self {
            q_target: q.clone(),
            q,
            opt,
            state_dim,
            n_actions,
        })
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn q_values(&self, states: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.q.predict(states)
    }

    pub fn greedy(&self, state: &[f64]) -> Result<usize> {
        let x = ArrayView2::from_shape((1, state.len()), state).map_err(|e| Error::Shape(e.to_string()))?;
        Ok(argmax(self.q.predict(x)?.row(0)))
    }

    pub fn targets(
        &self,
        rewards: ArrayView1<f64>,
        next_states: ArrayView2<f64>,
        terminals: ArrayView1<f64>,
        gamma: f64,
    ) -> Result<Array1<f64>> {
        let next_q = self.q_target.predict(next_states)?;
        let max_q: Array1<f64> = next_q.rows().into_iter().map(|r| r[argmax(r)]).collect();
        Ok(dqn_target(rewards, max_q.view(), terminals, gamma))
    }

    /// Mean squared TD error on the taken actions and its gradients.
    pub fn loss_and_grads(&self, states: ArrayView2<f64>, actions: &[usize], y: ArrayView1<f64>) -> Result<(f64, Gradients)> {
        check_batch(states, actions.len(), self.state_dim)?;
        if let Some(&a) = actions.iter().find(|&&a| a >= self.n_actions) {
            return Err(Error::InvalidAction(a));
        }
        let cache = self.q.forward(states)?;
        let taken: Array1<f64> = actions.iter().enumerate().map(|(i, &a)| cache.output[[i, a]]).collect();
        let (loss, d_taken) = mse(taken.view(), y);
        let mut g = Array2::zeros(cache.output.raw_dim());
        for (i, &a) in actions.iter().enumerate() {
            g[[i, a]] = d_taken[i];
        }
        Ok((loss, self.q.backward(&cache, g.view())?))
    }

    pub fn update(
        &mut self,
        batch: &StateBatch,
        actions: &[usize],
        gamma: f64,
        trace: Option<&mut UpdateTrace>,
    ) -> Result<UpdateOutput> {
        let y = self.targets(batch.rewards, batch.next_states, batch.terminals, gamma)?;
        let (loss, grads) = self.loss_and_grads(batch.states, actions, y.view())?;
        if let Some(t) = trace {
            t.critic_states = Some(batch.states.to_owned());
        }
        self.opt.step_mlp(&mut self.q, &grads.params)?;
        Ok(UpdateOutput {
            critic_loss: loss,
            actor_loss: None,
            alpha_loss: None,
            d_states: grads.input,
        })
    }

    pub fn hard_update(&mut self) -> Result<()> {
        polyak_update(self.q_target.params_mut(), self.q.params(), 1.0)
    }
}
