//! Reparameterized diagonal Gaussian sampling, optionally tanh-squashed.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln(1 - tanh(u)^2)` without cancellation for large |u|.
fn log1m_tanh_sq(u: f64) -> f64 {
    let x = -2.0 * u;
    let softplus = if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
    2.0 * (std::f64::consts::LN_2 - u - softplus)
}

#[derive(Debug, Clone)]
pub struct GaussianSample {
    pub mean: Array2<f64>,
    /// Log-std after clamping.
    pub log_std: Array2<f64>,
    pub std: Array2<f64>,
    pub noise: Array2<f64>,
    /// `mean + std * noise`.
    pub sample: Array2<f64>,
    /// Log-density of `sample`, summed over dimensions.
    pub log_prob: Array1<f64>,
    /// 1 where the clamp was inactive, 0 where it cut the gradient.
    clamp_pass: Array2<f64>,
}

pub fn gaussian_sample(mean: ArrayView2<f64>, log_std: ArrayView2<f64>, noise: ArrayView2<f64>) -> GaussianSample {
    assert_eq!(mean.dim(), log_std.dim());
    assert_eq!(mean.dim(), noise.dim());
    let clamp_pass = log_std.mapv(|v| if (LOG_STD_MIN..=LOG_STD_MAX).contains(&v) { 1.0 } else { 0.0 });
    let log_std = log_std.mapv(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX));
    let std = log_std.mapv(f64::exp);
    let sample = &mean + &(&std * &noise);
    let mut log_prob = Array1::zeros(mean.nrows());
    for (i, lp) in log_prob.iter_mut().enumerate() {
        *lp = noise
            .row(i)
            .iter()
            .zip(log_std.row(i))
            .map(|(&xi, &ls)| -0.5 * xi * xi - ls - HALF_LN_2PI)
            .sum();
    }
    GaussianSample {
        mean: mean.to_owned(),
        log_std,
        std,
        noise: noise.to_owned(),
        sample,
        log_prob,
        clamp_pass,
    }
}

impl GaussianSample {
    /// Gradients with respect to the mean and the unclamped log-std, given
    /// upstream gradients on the sample and on its log-density.
    pub fn backward(&self, d_sample: ArrayView2<f64>, d_log_prob: ArrayView1<f64>) -> (Array2<f64>, Array2<f64>) {
        let d_mean = d_sample.to_owned();
        let mut d_log_std = &d_sample * &self.std * &self.noise;
        d_log_std -= &d_log_prob.insert_axis(Axis(1));
        d_log_std *= &self.clamp_pass;
        (d_mean, d_log_std)
    }
}

/// A Gaussian sample pushed through tanh, with the change-of-variables
/// correction applied to the log-density.
#[derive(Debug, Clone)]
pub struct SquashedSample {
    pub base: GaussianSample,
    pub action: Array2<f64>,
    pub log_prob: Array1<f64>,
}

pub fn squashed_sample(mean: ArrayView2<f64>, log_std: ArrayView2<f64>, noise: ArrayView2<f64>) -> SquashedSample {
    let base = gaussian_sample(mean, log_std, noise);
    let action = base.sample.mapv(f64::tanh);
    let correction = base.sample.mapv(log1m_tanh_sq).sum_axis(Axis(1));
    let log_prob = &base.log_prob - &correction;
    SquashedSample { base, action, log_prob }
}

impl SquashedSample {
    pub fn backward(&self, d_action: ArrayView2<f64>, d_log_prob: ArrayView1<f64>) -> (Array2<f64>, Array2<f64>) {
        // d/du of the squashed log-density correction is 2 tanh(u)
        let mut d_pre = Array2::zeros(self.action.raw_dim());
        Zip::from(&mut d_pre)
            .and(&d_action)
            .and(&self.action)
            .for_each(|d, &da, &a| *d = da * (1.0 - a * a));
        for (mut row, (&dl, arow)) in d_pre.rows_mut().into_iter().zip(d_log_prob.iter().zip(self.action.rows())) {
            row.zip_mut_with(&arow, |d, &a| *d += dl * 2.0 * a);
        }
        self.base.backward(d_pre.view(), d_log_prob)
    }
}
