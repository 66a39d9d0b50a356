use ndarray::{concatenate, s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Activation, Mlp, MlpSpec};

/// Critic input: state columns followed by action columns.
pub(crate) fn join_cols(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    concatenate(Axis(1), &[a, b]).expect("row counts match")
}

pub(crate) fn state_cols(g: &Array2<f64>, state_dim: usize) -> Array2<f64> {
    g.slice(s![.., ..state_dim]).to_owned()
}

pub(crate) fn action_cols(g: &Array2<f64>, state_dim: usize) -> Array2<f64> {
    g.slice(s![.., state_dim..]).to_owned()
}

/// Mean squared error of a one-column prediction and its gradient.
pub(crate) fn mse(pred: ArrayView1<f64>, y: ArrayView1<f64>) -> (f64, Array1<f64>) {
    let n = pred.len() as f64;
    let diff = &pred - &y;
    let loss = diff.mapv(|d| d * d).sum() / n;
    (loss, diff * (2.0 / n))
}

pub(crate) fn check_batch(states: ArrayView2<f64>, rows: usize, width: usize) -> Result<()> {
    if states.nrows() != rows || states.ncols() != width {
        return Err(Error::Shape(format!(
            "expected a {rows}x{width} batch, got {}x{}",
            states.nrows(),
            states.ncols()
        )));
    }
    if rows == 0 {
        return Err(Error::Shape("empty batch".into()));
    }
    Ok(())
}

pub(crate) fn build<R: rand::Rng + ?Sized>(widths: Vec<usize>, out: Activation, rng: &mut R) -> Result<Mlp> {
    Mlp::new(MlpSpec::new(&widths).with_output(out), rng)
}

pub(crate) fn widths(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut w = Vec::with_capacity(hidden.len() + 2);
    w.push(input);
    w.extend_from_slice(hidden);
    w.push(output);
    w
}

/// Copies of the state matrices each consumer saw during one update, for
/// checking that a single encoder pass feeds all of them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateTrace {
    pub critic_states: Option<Array2<f64>>,
    pub actor_states: Option<Array2<f64>>,
    pub transition_states: Option<Array2<f64>>,
}

/// Outcome of one gradient update of an algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateOutput {
    pub critic_loss: f64,
    pub actor_loss: Option<f64>,
    pub alpha_loss: Option<f64>,
    /// Gradient of the critic loss with respect to the input states.
    pub d_states: Array2<f64>,
}

/// Transition batch expressed in whatever state space the agent learns in.
#[derive(Debug, Clone, Copy)]
pub struct StateBatch<'a> {
    pub states: ArrayView2<'a, f64>,
    pub next_states: ArrayView2<'a, f64>,
    pub rewards: ArrayView1<'a, f64>,
    pub terminals: ArrayView1<'a, f64>,
}
