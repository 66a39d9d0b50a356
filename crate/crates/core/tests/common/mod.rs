#![allow(dead_code)]

use ndarray::Array2;
use ogn_core::nn::{Mlp, Params};
use rand::Rng;

pub mod grad;
pub mod oracles;
pub mod reward;

pub const H: f64 = 1e-5;
pub const TOL: f64 = 1e-4;

/// Relative error between two gradient vectors, 0 when both vanish.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt() + b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        0.0
    } else {
        diff / norm
    }
}

/// Finite-difference gradient plus a flag for probes that straddle a kink.
pub struct Fd {
    pub grad: Vec<f64>,
    pub kinked: bool,
}

/// Central differences of `f(k, h)`, the objective with coordinate `k`
/// shifted by `h`, for `k < n`. Steps of `H` and `H / 2` agree to second
/// order on smooth functions; a larger gap means a probe crossed a kink.
pub fn central(n: usize, mut f: impl FnMut(usize, f64) -> f64) -> Fd {
    let mut gap = 0.0f64;
    let grad: Vec<f64> = (0..n)
        .map(|k| {
            let d = (f(k, H) - f(k, -H)) / (2.0 * H);
            let half = (f(k, H / 2.0) - f(k, -H / 2.0)) / H;
            gap = gap.max((d - half).abs());
            d
        })
        .collect();
    let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    Fd {
        grad,
        kinked: gap > 1e-5 * scale + 1e-10,
    }
}

/// Relative error of `analytic` against `fd`, or `None` at a kink.
pub fn score(analytic: &[f64], fd: &Fd) -> Option<f64> {
    (!fd.kinked).then(|| rel_err(analytic, &fd.grad))
}

/// Run `trial` until `wanted` smooth instances were scored and return the
/// worst error. Fails when kinks reject more than a quarter of the draws.
pub fn run_trials<R>(rng: &mut R, wanted: usize, mut trial: impl FnMut(&mut R) -> Vec<Option<f64>>) -> f64 {
    let (mut kept, mut rejected, mut worst) = (0, 0, 0.0f64);
    while kept < wanted {
        let scores = trial(rng);
        if scores.iter().any(Option::is_none) {
            rejected += 1;
            assert!(rejected * 4 <= wanted, "too many non-smooth draws");
            continue;
        }
        kept += 1;
        worst = scores.into_iter().flatten().fold(worst, f64::max);
    }
    worst
}

pub fn shift_param(p: &mut Params, mut k: usize, h: f64) {
    for s in p.slices_mut() {
        if k < s.len() {
            s[k] += h;
            return;
        }
        k -= s.len();
    }
    panic!("parameter index out of range");
}

/// Numerical gradient of `obj` with respect to the parameters of the model
/// reached through `pick`.
pub fn param_grad<T: Clone>(base: &T, pick: impl Fn(&mut T) -> &mut Mlp, obj: impl Fn(&T) -> f64) -> Fd {
    let mut probe = base.clone();
    let n = pick(&mut probe).params().len();
    central(n, |k, h| {
        let mut t = base.clone();
        shift_param(pick(&mut t).params_mut(), k, h);
        obj(&t)
    })
}

/// Numerical gradient of `obj` with respect to the entries of `x`.
pub fn input_grad(x: &Array2<f64>, obj: impl Fn(&Array2<f64>) -> f64) -> Fd {
    central(x.len(), |k, h| {
        let mut y = x.clone();
        y.as_slice_mut().unwrap()[k] += h;
        obj(&y)
    })
}

pub fn uniform<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-scale..scale))
}

pub fn normal<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.sample(rand_distr::StandardNormal))
}

pub fn flat(a: &Array2<f64>) -> Vec<f64> {
    a.iter().copied().collect()
}
