use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LEAKY_SLOPE: f64 = 0.01;
pub const LAYER_NORM_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    LeakyRelu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, x: &mut Array2<f64>) {
        match self {
            Activation::LeakyRelu => x.mapv_inplace(|v| if v > 0.0 { v } else { LEAKY_SLOPE * v }),
            Activation::Tanh => x.mapv_inplace(f64::tanh),
            Activation::Identity => {}
        }
    }

    /// Multiply `grad` in place by the activation derivative, given the
    /// pre-activation and the activation output.
    fn backprop(self, grad: &mut Array2<f64>, pre: &Array2<f64>, post: &Array2<f64>) {
        match self {
            Activation::LeakyRelu => grad.zip_mut_with(pre, |g, &p| {
                if p <= 0.0 {
                    *g *= LEAKY_SLOPE
                }
            }),
            Activation::Tanh => grad.zip_mut_with(post, |g, &y| *g *= 1.0 - y * y),
            Activation::Identity => {}
        }
    }
}

/// How the final layer output is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Head {
    Single,
    /// Output splits into a mean half and a log-std half.
    MeanLogStd,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub widths: Vec<usize>,
    /// One activation per affine layer.
    pub activations: Vec<Activation>,
    /// Apply LayerNorm then Tanh after the last layer.
    pub layer_norm: bool,
    pub head: Head,
}

impl MlpSpec {
    /// LeakyReLU between layers, linear output.
    pub fn new(widths: &[usize]) -> Self {
        let n = widths.len().saturating_sub(1);
        let mut activations = vec![Activation::LeakyRelu; n];
        if let Some(last) = activations.last_mut() {
            *last = Activation::Identity;
        }
        Self {
            widths: widths.to_vec(),
            activations,
            layer_norm: false,
            head: Head::Single,
        }
    }

    pub fn with_output(mut self, act: Activation) -> Self {
        if let Some(last) = self.activations.last_mut() {
            *last = act;
        }
        self
    }

    pub fn with_layer_norm(mut self) -> Self {
        self.layer_norm = true;
        self
    }

    pub fn with_gaussian_head(mut self) -> Self {
        self.head = Head::MeanLogStd;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.len() < 2 || self.widths.iter().any(|&w| w == 0) {
            return Err(Error::Shape(format!("invalid layer widths {:?}", self.widths)));
        }
        if self.activations.len() != self.widths.len() - 1 {
            return Err(Error::Shape("one activation per layer required".into()));
        }
        if self.head == Head::MeanLogStd && self.output_dim() % 2 != 0 {
            return Err(Error::Shape("gaussian head needs an even output width".into()));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.widths.len() - 1
    }

    /// Multiply-accumulates of the affine layers for one sample.
    pub fn macs(&self) -> u64 {
        self.widths.windows(2).map(|w| (w[0] * w[1]) as u64).sum()
    }

    pub fn num_params(&self) -> u64 {
        let affine: u64 = self.widths.windows(2).map(|w| (w[0] * w[1] + w[1]) as u64).sum();
        let norm = if self.layer_norm { 2 * self.output_dim() as u64 } else { 0 };
        affine + norm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    /// Shape (in, out).
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerNormParams {
    pub gain: Array1<f64>,
    pub shift: Array1<f64>,
}

/// Trainable tensors of one MLP. Also used as the gradient container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub layers: Vec<Linear>,
    pub norm: Option<LayerNormParams>,
}

impl Params {
    pub fn zeros(spec: &MlpSpec) -> Self {
        let layers = spec
            .widths
            .windows(2)
            .map(|w| Linear {
                weight: Array2::zeros((w[0], w[1])),
                bias: Array1::zeros(w[1]),
            })
            .collect();
        let norm = spec.layer_norm.then(|| LayerNormParams {
            gain: Array1::zeros(spec.output_dim()),
            shift: Array1::zeros(spec.output_dim()),
        });
        Self { layers, norm }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| Linear {
                    weight: Array2::zeros(l.weight.raw_dim()),
                    bias: Array1::zeros(l.bias.len()),
                })
                .collect(),
            norm: self.norm.as_ref().map(|n| LayerNormParams {
                gain: Array1::zeros(n.gain.len()),
                shift: Array1::zeros(n.shift.len()),
            }),
        }
    }

    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(2 * self.layers.len() + 2);
        for l in &self.layers {
            out.push(l.weight.as_slice().expect("standard layout"));
            out.push(l.bias.as_slice().expect("standard layout"));
        }
        if let Some(n) = &self.norm {
            out.push(n.gain.as_slice().expect("standard layout"));
            out.push(n.shift.as_slice().expect("standard layout"));
        }
        out
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(2 * self.layers.len() + 2);
        for l in &mut self.layers {
            out.push(l.weight.as_slice_mut().expect("standard layout"));
            out.push(l.bias.as_slice_mut().expect("standard layout"));
        }
        if let Some(n) = &mut self.norm {
            out.push(n.gain.as_slice_mut().expect("standard layout"));
            out.push(n.shift.as_slice_mut().expect("standard layout"));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn same_shape(&self, other: &Params) -> bool {
        let a = self.slices();
        let b = other.slices();
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.len() == y.len())
    }

    pub fn all_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }

    /// Flattened copy of every tensor, in `slices` order.
    pub fn to_flat(&self) -> Vec<f64> {
        self.slices().concat()
    }

    pub fn add_scaled(&mut self, other: &Params, scale: f64) {
        for (a, b) in self.slices_mut().into_iter().zip(other.slices()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
    }
}

#[derive(Debug, Clone)]
struct NormCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
}

/// Intermediates of one forward pass, consumed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    version: u64,
    /// Input to each affine layer.
    inputs: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
    /// Output of the last layer's activation (before the norm, if any).
    last_post: Array2<f64>,
    norm: Option<NormCache>,
    pub output: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub params: Params,
    pub input: Array2<f64>,
}

/// Dense multilayer perceptron with explicit reverse-mode gradients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mlp {
    spec: MlpSpec,
    params: Params,
    #[serde(skip)]
    version: u64,
}

/// Equality of architecture and weights; cache bookkeeping is ignored.
impl PartialEq for Mlp {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.params == other.params
    }
}

impl Mlp {
    /// Fan-in uniform weights in +/- 1/sqrt(fan_in), zero biases, unit
    /// norm gain.
    pub fn new<R: Rng + ?Sized>(spec: MlpSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let mut params = Params::zeros(&spec);
        for l in &mut params.layers {
            let bound = 1.0 / (l.weight.nrows() as f64).sqrt();
            l.weight.mapv_inplace(|_| rng.random_range(-bound..bound));
        }
        if let Some(n) = &mut params.norm {
            n.gain.fill(1.0);
        }
        Ok(Self { spec, params, version: 0 })
    }

    pub fn from_params(spec: MlpSpec, params: Params) -> Result<Self> {
        spec.validate()?;
        if !params.same_shape(&Params::zeros(&spec)) {
            return Err(Error::Shape("parameters do not match spec".into()));
        }
        Ok(Self { spec, params, version: 0 })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Mutable access; invalidates outstanding forward caches.
    pub fn params_mut(&mut self) -> &mut Params {
        self.version += 1;
        &mut self.params
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Result<ForwardCache> {
        if x.ncols() != self.spec.input_dim() {
            return Err(Error::Shape(format!(
                "input width {} != {}",
                x.ncols(),
                self.spec.input_dim()
            )));
        }
        let n_layers = self.params.layers.len();
        let mut inputs = Vec::with_capacity(n_layers);
        let mut pre = Vec::with_capacity(n_layers);
        let mut h = x.to_owned();
        for (l, act) in self.params.layers.iter().zip(&self.spec.activations) {
            let mut z = h.dot(&l.weight);
            z += &l.bias;
            let mut a = z.clone();
            act.apply(&mut a);
            inputs.push(h);
            pre.push(z);
            h = a;
        }
        let last_post = h;
        let (norm, output) = match &self.params.norm {
            Some(np) => {
                let (xhat, inv_std) = normalize_rows(&last_post);
                let mut y = &xhat * &np.gain;
                y += &np.shift;
                y.mapv_inplace(f64::tanh);
                (Some(NormCache { xhat, inv_std }), y)
            }
            None => (None, last_post.clone()),
        };
        Ok(ForwardCache {
            version: self.version,
            inputs,
            pre,
            last_post,
            norm,
            output,
        })
    }

    /// Forward pass without keeping intermediates.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward(x)?.output)
    }

    pub fn backward(&self, cache: &ForwardCache, grad_out: ArrayView2<f64>) -> Result<Gradients> {
        if cache.version != self.version {
            return Err(Error::StaleCache);
        }
        if grad_out.dim() != cache.output.dim() {
            return Err(Error::Shape("output gradient shape".into()));
        }
        let mut grads = self.params.zeros_like();
        let mut g = grad_out.to_owned();

        if let (Some(np), Some(nc), Some(ng)) = (&self.params.norm, &cache.norm, &mut grads.norm) {
            // through tanh
            g.zip_mut_with(&cache.output, |gi, &y| *gi *= 1.0 - y * y);
            ng.shift = g.sum_axis(Axis(0));
            ng.gain = (&g * &nc.xhat).sum_axis(Axis(0));
            let dxhat = &g * &np.gain;
            g = layer_norm_input_grad(&dxhat, &nc.xhat, &nc.inv_std);
        }

        for i in (0..self.params.layers.len()).rev() {
            let post = if i + 1 < self.params.layers.len() {
                &cache.inputs[i + 1]
            } else {
                &cache.last_post
            };
            self.spec.activations[i].backprop(&mut g, &cache.pre[i], post);
            let lg = &mut grads.layers[i];
            // a transposed product may come back column-major
            lg.weight = cache.inputs[i].t().dot(&g).as_standard_layout().into_owned();
            lg.bias = g.sum_axis(Axis(0));
            g = g.dot(&self.params.layers[i].weight.t());
        }
        Ok(Gradients { params: grads, input: g })
    }
}

fn normalize_rows(h: &Array2<f64>) -> (Array2<f64>, Array1<f64>) {
    let d = h.ncols() as f64;
    let mean = h.sum_axis(Axis(1)) / d;
    let mut xhat = h - &mean.view().insert_axis(Axis(1));
    let var = xhat.mapv(|v| v * v).sum_axis(Axis(1)) / d;
    let inv_std = var.mapv(|v| 1.0 / (v + LAYER_NORM_EPS).sqrt());
    xhat *= &inv_std.view().insert_axis(Axis(1));
    (xhat, inv_std)
}

fn layer_norm_input_grad(dxhat: &Array2<f64>, xhat: &Array2<f64>, inv_std: &Array1<f64>) -> Array2<f64> {
    let d = dxhat.ncols() as f64;
    let sum_d = dxhat.sum_axis(Axis(1)).insert_axis(Axis(1));
    let sum_dx = (dxhat * xhat).sum_axis(Axis(1)).insert_axis(Axis(1));
    let mut out = dxhat * d - &sum_d - &(xhat * &sum_dx);
    out *= &(inv_std / d).insert_axis(Axis(1));
    out
}

/// Split a mean/log-std head output into its two halves.
pub fn split_head(out: &Array2<f64>) -> (ArrayView2<'_, f64>, ArrayView2<'_, f64>) {
    let half = out.ncols() / 2;
    (out.slice(s![.., ..half]), out.slice(s![.., half..]))
}

/// Join mean and log-std gradients into one head gradient.
pub fn join_head(d_mean: &Array2<f64>, d_log_std: &Array2<f64>) -> Array2<f64> {
    ndarray::concatenate(Axis(1), &[d_mean.view(), d_log_std.view()]).expect("matching rows")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    fn random_batch(r: &mut ChaCha8Rng, n: usize, d: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, d), |_| r.random_range(-1.0..1.0))
    }

    #[test]
    fn identity_layer() {
        let spec = MlpSpec::new(&[3, 3]);
        let mut p = Params::zeros(&spec);
        p.layers[0].weight = Array2::eye(3);
        let m = Mlp::from_params(spec, p).unwrap();
        let x = array![[0.5, -2.0, 3.0]];
        assert_eq!(m.predict(x.view()).unwrap(), x);
    }

    #[test]
    fn constant_input_layer_norm_is_zero() {
        let spec = MlpSpec::new(&[4, 4]).with_layer_norm();
        let mut p = Params::zeros(&spec);
        p.layers[0].weight = Array2::eye(4);
        p.norm.as_mut().unwrap().gain.fill(1.0);
        let m = Mlp::from_params(spec, p).unwrap();
        let out = m.predict(array![[2.5, 2.5, 2.5, 2.5]].view()).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn layer_norm_rows_have_zero_mean() {
        let mut r = rng();
        let h = random_batch(&mut r, 7, 9) * 5.0;
        let (xhat, _) = normalize_rows(&h);
        for row in xhat.rows() {
            assert!(row.sum().abs() / 9.0 < 1e-12);
        }
    }

    #[test]
    fn batch_equals_stacked_samples() {
        let mut r = rng();
        let m = Mlp::new(MlpSpec::new(&[5, 8, 3]).with_layer_norm(), &mut r).unwrap();
        let x = random_batch(&mut r, 6, 5);
        let full = m.predict(x.view()).unwrap();
        for i in 0..6 {
            let one = m.predict(x.slice(s![i..i + 1, ..])).unwrap();
            for j in 0..3 {
                assert!((one[[0, j]] - full[[i, j]]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn tanh_output_is_open_interval() {
        let mut r = rng();
        let m = Mlp::new(MlpSpec::new(&[4, 6, 3]).with_output(Activation::Tanh), &mut r).unwrap();
        let out = m.predict((random_batch(&mut r, 50, 4) * 3.0).view()).unwrap();
        assert!(out.iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn zero_output_grad_gives_zero_param_grads() {
        let mut r = rng();
        let m = Mlp::new(MlpSpec::new(&[4, 6, 3]).with_layer_norm(), &mut r).unwrap();
        let x = random_batch(&mut r, 5, 4);
        let c = m.forward(x.view()).unwrap();
        let g = m.backward(&c, Array2::zeros((5, 3)).view()).unwrap();
        assert!(g.params.to_flat().iter().all(|&v| v == 0.0));
        assert!(g.input.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn batch_gradient_is_sum_of_sample_gradients() {
        let mut r = rng();
        let m = Mlp::new(MlpSpec::new(&[3, 5, 2]).with_layer_norm(), &mut r).unwrap();
        let x = random_batch(&mut r, 4, 3);
        let go = random_batch(&mut r, 4, 2);
        let c = m.forward(x.view()).unwrap();
        let full = m.backward(&c, go.view()).unwrap().params.to_flat();
        let mut sum = vec![0.0; full.len()];
        for i in 0..4 {
            let ci = m.forward(x.slice(s![i..i + 1, ..])).unwrap();
            let gi = m.backward(&ci, go.slice(s![i..i + 1, ..])).unwrap().params.to_flat();
            for (a, b) in sum.iter_mut().zip(gi) {
                *a += b;
            }
        }
        for (a, b) in sum.iter().zip(&full) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn stale_cache_is_rejected() {
        let mut r = rng();
        let mut m = Mlp::new(MlpSpec::new(&[2, 2]), &mut r).unwrap();
        let c = m.forward(array![[1.0, 2.0]].view()).unwrap();
        m.params_mut().layers[0].bias[0] += 1.0;
        assert!(matches!(m.backward(&c, array![[1.0, 1.0]].view()), Err(Error::StaleCache)));
    }

    #[test]
    fn shape_errors() {
        let mut r = rng();
        let m = Mlp::new(MlpSpec::new(&[2, 2]), &mut r).unwrap();
        assert!(matches!(m.forward(array![[1.0, 2.0, 3.0]].view()), Err(Error::Shape(_))));
        assert!(Mlp::new(MlpSpec::new(&[2]), &mut r).is_err());
        assert!(Mlp::new(MlpSpec::new(&[2, 3]).with_gaussian_head(), &mut r).is_err());
    }

    #[test]
    fn table_counts() {
        let dqn = MlpSpec::new(&[18, 64, 64, 9]);
        assert_eq!(dqn.macs(), 5824);
        assert_eq!(dqn.num_params(), 5961);
    }

    /// Relative error between two gradient vectors, 0 when both vanish.
    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt() + b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            0.0
        } else {
            diff / norm
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut r = rng();
        let specs = [
            MlpSpec::new(&[3, 5, 4, 2]),
            MlpSpec::new(&[3, 4, 3]).with_output(Activation::Tanh),
            MlpSpec::new(&[4, 6, 5]).with_layer_norm(),
            MlpSpec::new(&[2, 3, 4]).with_gaussian_head(),
        ];
        let h = 1e-5;
        for spec in specs {
            for _ in 0..5 {
                let m = Mlp::new(spec.clone(), &mut r).unwrap();
                let x = random_batch(&mut r, 3, spec.input_dim());
                let w = random_batch(&mut r, 3, spec.output_dim());
                // scalar objective: sum(w * out)
                let obj = |m: &Mlp, x: &Array2<f64>| (&m.predict(x.view()).unwrap() * &w).sum();
                let c = m.forward(x.view()).unwrap();
                let g = m.backward(&c, w.view()).unwrap();

                let mut numeric = Vec::new();
                let n = m.params().len();
                for k in 0..n {
                    let mut plus = m.clone();
                    let mut minus = m.clone();
                    perturb(plus.params_mut(), k, h);
                    perturb(minus.params_mut(), k, -h);
                    numeric.push((obj(&plus, &x) - obj(&minus, &x)) / (2.0 * h));
                }
                let e = rel_err(&g.params.to_flat(), &numeric);
                assert!(e < 1e-4, "param grad rel err {e} for {spec:?}");

                let mut numeric_in = Vec::new();
                for k in 0..x.len() {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp.as_slice_mut().unwrap()[k] += h;
                    xm.as_slice_mut().unwrap()[k] -= h;
                    numeric_in.push((obj(&m, &xp) - obj(&m, &xm)) / (2.0 * h));
                }
                let e = rel_err(g.input.as_slice().unwrap(), &numeric_in);
                assert!(e < 1e-4, "input grad rel err {e}");
            }
        }
    }

    fn perturb(p: &mut Params, mut k: usize, h: f64) {
        for s in p.slices_mut() {
            if k < s.len() {
                s[k] += h;
                return;
            }
            k -= s.len();
        }
    }
}
