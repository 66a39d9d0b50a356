//! Predictive losses with gradients on the prediction side only.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};

use crate::error::{Error, Result};
use crate::nn::{LOG_STD_MAX, LOG_STD_MIN};

const NORM_FLOOR: f64 = 1e-12;

fn unit_rows(x: ArrayView2<f64>) -> (Array2<f64>, Array1<f64>) {
    let norms = x.map_axis(Axis(1), |r| r.dot(&r).sqrt().max(NORM_FLOOR));
    let unit = &x / &norms.view().insert_axis(Axis(1));
    (unit, norms)
}

/// Contrastive loss over a batch: row `i` of `pred` must pick row `i` of
/// `target` among all targets by cosine similarity scaled by `1/temperature`.
/// Returns the mean loss and its gradient with respect to `pred`.
pub fn infonce_loss(pred: ArrayView2<f64>, target: ArrayView2<f64>, temperature: f64) -> Result<(f64, Array2<f64>)> {
    if pred.dim() != target.dim() {
        return Err(Error::Shape("prediction and target batches differ".into()));
    }
    let n = pred.nrows();
    if n < 2 {
        return Err(Error::Shape("contrastive loss needs at least two samples".into()));
    }
    let (p, p_norm) = unit_rows(pred);
    let (z, _) = unit_rows(target);
    // logits[i, j] = <p_i, z_j> / T
    let logits = p.dot(&z.t()) / temperature;
    let mut loss = 0.0;
    let mut d_logits = Array2::zeros((n, n));
    for i in 0..n {
        let row = logits.row(i);
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let sum: f64 = row.iter().map(|&v| (v - m).exp()).sum();
        let lse = m + sum.ln();
        loss += lse - row[i];
        for j in 0..n {
            d_logits[[i, j]] = (row[j] - lse).exp() / n as f64;
        }
        d_logits[[i, i]] -= 1.0 / n as f64;
    }
    loss /= n as f64;
    let d_p = d_logits.dot(&z) / temperature;
    // through the row normalization
    let proj = (&d_p * &p).sum_axis(Axis(1)).insert_axis(Axis(1));
    let d_pred = (&d_p - &(&p * &proj)) / &p_norm.insert_axis(Axis(1));
    Ok((loss, d_pred))
}

/// Batch-mean of `KL(P || Q)` between diagonal Gaussians, summed over
/// dimensions. Gradients are with respect to Q's mean and unclamped log-std.
pub fn kl_diag_gaussian(
    p_mean: ArrayView2<f64>,
    p_log_std: ArrayView2<f64>,
    q_mean: ArrayView2<f64>,
    q_log_std: ArrayView2<f64>,
) -> Result<(f64, Array2<f64>, Array2<f64>)> {
    let d = p_mean.dim();
    if p_log_std.dim() != d || q_mean.dim() != d || q_log_std.dim() != d {
        return Err(Error::Shape("gaussian parameter shapes differ".into()));
    }
    let n = d.0.max(1) as f64;
    let mut loss = 0.0;
    let mut d_mean = Array2::zeros(d);
    let mut d_ls = Array2::zeros(d);
    Zip::indexed(&mut d_mean).and(&mut d_ls).for_each(|(i, j), dm, dl| {
        let lp = p_log_std[[i, j]].clamp(LOG_STD_MIN, LOG_STD_MAX);
        let raw = q_log_std[[i, j]];
        let lq = raw.clamp(LOG_STD_MIN, LOG_STD_MAX);
        let var_q = (2.0 * lq).exp();
        let diff = q_mean[[i, j]] - p_mean[[i, j]];
        let ratio = ((2.0 * lp).exp() + diff * diff) / var_q;
        loss += lq - lp + 0.5 * ratio - 0.5;
        *dm = diff / var_q / n;
        *dl = if (LOG_STD_MIN..=LOG_STD_MAX).contains(&raw) {
            (1.0 - ratio) / n
        } else {
            0.0
        };
    });
    Ok((loss / n, d_mean, d_ls))
}

/// Mean squared error over every component, gradient on `pred`.
pub fn l2_loss(pred: ArrayView2<f64>, target: ArrayView2<f64>) -> Result<(f64, Array2<f64>)> {
    if pred.dim() != target.dim() {
        return Err(Error::Shape("prediction and target batches differ".into()));
    }
    let count = pred.len().max(1) as f64;
    let diff = &pred - &target;
    let loss = diff.mapv(|v| v * v).sum() / count;
    Ok((loss, diff * (2.0 / count)))
}
