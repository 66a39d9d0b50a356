use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{SrlConfig, SrlVariant};
use super::losses::{infonce_loss, kl_diag_gaussian, l2_loss};
use crate::error::{Error, Result};
use crate::nn::{
    join_head, polyak_update, split_head, squashed_sample, Activation, Adam, AdamConfig, CostReport, ForwardCache, Mlp,
    MlpSpec, ModelRole, Params, SquashedSample, LOG_STD_MAX, LOG_STD_MIN,
};
use crate::rl::UpdateTrace;

/// Diagonal Gaussian over pre-squash latent codes.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentGaussian {
    pub mean: Array2<f64>,
    /// Clamped log standard deviation.
    pub log_std: Array2<f64>,
}

impl LatentGaussian {
    fn from_head(out: &Array2<f64>) -> Self {
        let (m, s) = split_head(out);
        Self {
            mean: m.to_owned(),
            log_std: s.mapv(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX)),
        }
    }

    pub fn std(&self) -> Array2<f64> {
        self.log_std.mapv(f64::exp)
    }
}

/// One online-encoder pass kept for the backward step.
#[derive(Debug, Clone)]
pub struct Encoding {
    pub z: Array2<f64>,
    pub gaussian: Option<LatentGaussian>,
    cache: ForwardCache,
    squash: Option<SquashedSample>,
}

/// Codes of next observations used as prediction targets and for
/// bootstrapping; never differentiated.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetCodes {
    pub z: Array2<f64>,
    pub gaussian: Option<LatentGaussian>,
}

/// Predictive loss and the gradients it induces.
#[derive(Debug, Clone)]
pub struct SprEval {
    pub loss: f64,
    pub d_z: Array2<f64>,
    pub transition: Params,
    pub projection: Params,
}

/// Gradients of one joint representation step.
#[derive(Debug, Clone, PartialEq)]
pub struct JointGrads {
    pub spr_loss: f64,
    pub encoder: Params,
    pub transition: Params,
    pub projection: Params,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrlStats {
    pub spr_loss: f64,
}

/// Encoder, target encoder, transition and projection models with their
/// optimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrlModels {
    pub config: SrlConfig,
    pub encoder: Mlp,
    pub target_encoder: Mlp,
    pub transition: Mlp,
    pub projection: Mlp,
    enc_opt: Adam,
    trans_opt: Adam,
    proj_opt: Adam,
    obs_dim: usize,
    action_dim: usize,
}

impl SrlModels {
    pub fn new<R: Rng + ?Sized>(config: SrlConfig, obs_dim: usize, action_dim: usize, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let (l, h) = (config.latent_dim, config.hidden);
        let sto = config.variant == SrlVariant::Sto;
        let enc_spec = if sto {
            MlpSpec::new(&[obs_dim, h, h, 2 * l]).with_gaussian_head()
        } else {
            MlpSpec::new(&[obs_dim, h, h, l]).with_layer_norm()
        };
        let proj_spec = if sto {
            MlpSpec::new(&[l, h, 2 * l]).with_gaussian_head()
        } else {
            MlpSpec::new(&[l, h, l]).with_output(Activation::Tanh)
        };
        let encoder = Mlp::new(enc_spec, rng)?;
        let transition = Mlp::new(MlpSpec::new(&[l + action_dim, h, l]).with_layer_norm(), rng)?;
        let projection = Mlp::new(proj_spec, rng)?;
        let opt = AdamConfig::with_lr(config.lr);
        Ok(Self {
            enc_opt: Adam::for_params(opt, encoder.params()),
            trans_opt: Adam::for_params(opt, transition.params()),
            proj_opt: Adam::for_params(opt, projection.params()),
            target_encoder: encoder.clone(),
            encoder,
            transition,
            projection,
            config,
            obs_dim,
            action_dim,
        })
    }

    pub fn latent_dim(&self) -> usize {
        self.config.latent_dim
    }

    pub fn variant(&self) -> SrlVariant {
        self.config.variant
    }

    fn check_obs(&self, obs: ArrayView2<f64>) -> Result<()> {
        if obs.ncols() != self.obs_dim {
            return Err(Error::Shape(format!("observation width {} != {}", obs.ncols(), self.obs_dim)));
        }
        Ok(())
    }

    /// Online encoding. For the stochastic variant `noise` drives the
    /// reparameterized sample; `None` yields the mean code.
    pub fn encode(&self, obs: ArrayView2<f64>, noise: Option<ArrayView2<f64>>) -> Result<Encoding> {
        self.check_obs(obs)?;
        let cache = self.encoder.forward(obs)?;
        if self.variant() != SrlVariant::Sto {
            return Ok(Encoding {
                z: cache.output.clone(),
                gaussian: None,
                cache,
                squash: None,
            });
        }
        let (mean, log_std) = split_head(&cache.output);
        let zeros;
        let noise = match noise {
            Some(n) => n,
            None => {
                zeros = Array2::zeros(mean.raw_dim());
                zeros.view()
            }
        };
        let squash = squashed_sample(mean, log_std, noise);
        Ok(Encoding {
            z: squash.action.clone(),
            gaussian: Some(LatentGaussian::from_head(&cache.output)),
            cache,
            squash: Some(squash),
        })
    }

    /// Codes used for acting: the mean code for the stochastic variant.
    pub fn codes(&self, obs: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_obs(obs)?;
        let out = self.encoder.predict(obs)?;
        Ok(match self.variant() {
            SrlVariant::Sto => split_head(&out).0.mapv(f64::tanh),
            _ => out,
        })
    }

    /// Next-state codes from the target branch. The online-target variant
    /// reads the online encoder with gradients stopped.
    pub fn target_codes(&self, next_obs: ArrayView2<f64>) -> Result<TargetCodes> {
        self.check_obs(next_obs)?;
        match self.variant() {
            SrlVariant::Det => Ok(TargetCodes {
                z: self.target_encoder.predict(next_obs)?,
                gaussian: None,
            }),
            SrlVariant::L2Online => Ok(TargetCodes {
                z: self.encoder.predict(next_obs)?,
                gaussian: None,
            }),
            SrlVariant::Sto => {
                let out = self.target_encoder.predict(next_obs)?;
                let g = LatentGaussian::from_head(&out);
                Ok(TargetCodes {
                    z: g.mean.mapv(f64::tanh),
                    gaussian: Some(g),
                })
            }
        }
    }

    /// Raw projection output for `z` and action features: next-code
    /// prediction, or mean/log-std halves for the stochastic variant.
    pub fn predict_next(&self, z: ArrayView2<f64>, actions: ArrayView2<f64>) -> Result<Array2<f64>> {
        let x = self.transition_input(z, actions)?;
        let h = self.transition.predict(x.view())?;
        self.projection.predict(h.view())
    }

    fn transition_input(&self, z: ArrayView2<f64>, actions: ArrayView2<f64>) -> Result<Array2<f64>> {
        if z.ncols() != self.latent_dim() || actions.ncols() != self.action_dim || z.nrows() != actions.nrows() {
            return Err(Error::Shape("latent/action batch shapes".into()));
        }
        Ok(ndarray::concatenate(ndarray::Axis(1), &[z, actions]).expect("rows match"))
    }

    /// Unweighted predictive loss for codes `z` with gradients on `z`, the
    /// transition model and the projection model.
    pub fn spr_loss_and_grads(&self, z: ArrayView2<f64>, actions: ArrayView2<f64>, target: &TargetCodes) -> Result<SprEval> {
        let x = self.transition_input(z, actions)?;
        let t_cache = self.transition.forward(x.view())?;
        let p_cache = self.projection.forward(t_cache.output.view())?;
        let (loss, d_out) = match self.variant() {
            SrlVariant::Det => infonce_loss(p_cache.output.view(), target.z.view(), self.config.temperature)?,
            SrlVariant::L2Online => l2_loss(p_cache.output.view(), target.z.view())?,
            SrlVariant::Sto => {
                let p = target
                    .gaussian
                    .as_ref()
                    .ok_or_else(|| Error::Shape("stochastic target codes need a distribution".into()))?;
                let (qm, qs) = split_head(&p_cache.output);
                let (loss, dm, ds) = kl_diag_gaussian(p.mean.view(), p.log_std.view(), qm, qs)?;
                (loss, join_head(&dm, &ds))
            }
        };
        let pg = self.projection.backward(&p_cache, d_out.view())?;
        let tg = self.transition.backward(&t_cache, pg.input.view())?;
        let d_z = tg.input.slice(ndarray::s![.., ..self.latent_dim()]).to_owned();
        Ok(SprEval {
            loss,
            d_z,
            transition: tg.params,
            projection: pg.params,
        })
    }

    /// Encoder parameter gradient for an upstream gradient on the codes.
    pub fn encoder_grads(&self, enc: &Encoding, d_z: ArrayView2<f64>) -> Result<Params> {
        let d_out = match &enc.squash {
            Some(sq) => {
                let (dm, ds) = sq.backward(d_z, Array1::zeros(d_z.nrows()).view());
                join_head(&dm, &ds)
            }
            None => d_z.to_owned(),
        };
        Ok(self.encoder.backward(&enc.cache, d_out.view())?.params)
    }

    /// Moving-average step of the target encoder.
    pub fn update_target(&mut self) -> Result<()> {
        let mix = 1.0 - self.config.momentum;
        polyak_update(self.target_encoder.params_mut(), self.encoder.params(), mix)
    }

    /// Gradients of `L_RL + weight * L_SPR` on every representation model,
    /// where `d_z_rl` is the RL gradient on the codes of `enc`. Nothing
    /// reaches the target branch: `target` is plain data.
    pub fn joint_grads(
        &self,
        enc: &Encoding,
        d_z_rl: ArrayView2<f64>,
        actions: ArrayView2<f64>,
        target: &TargetCodes,
    ) -> Result<JointGrads> {
        let w = self.config.weight;
        let spr = self.spr_loss_and_grads(enc.z.view(), actions, target)?;
        let d_z = &d_z_rl + &(&spr.d_z * w);
        let mut transition = spr.transition.zeros_like();
        transition.add_scaled(&spr.transition, w);
        let mut projection = spr.projection.zeros_like();
        projection.add_scaled(&spr.projection, w);
        Ok(JointGrads {
            spr_loss: spr.loss,
            encoder: self.encoder_grads(enc, d_z.view())?,
            transition,
            projection,
        })
    }

    /// Joint representation step: one optimizer step on every
    /// representation model from `joint_grads`, then the target encoder
    /// moving average.
    pub fn joint_step(
        &mut self,
        enc: &Encoding,
        d_z_rl: ArrayView2<f64>,
        actions: ArrayView2<f64>,
        target: &TargetCodes,
        trace: Option<&mut UpdateTrace>,
    ) -> Result<SrlStats> {
        let g = self.joint_grads(enc, d_z_rl, actions, target)?;
        if let Some(t) = trace {
            t.transition_states = Some(enc.z.clone());
        }
        self.enc_opt.step_mlp(&mut self.encoder, &g.encoder)?;
        if self.config.weight > 0.0 {
            self.trans_opt.step_mlp(&mut self.transition, &g.transition)?;
            self.proj_opt.step_mlp(&mut self.projection, &g.projection)?;
        }
        if self.variant() != SrlVariant::L2Online {
            self.update_target()?;
        }
        Ok(SrlStats { spr_loss: g.spr_loss })
    }

    /// Models for cost accounting. The encoder sits on the acting path.
    pub fn cost_models(&self) -> Vec<(&MlpSpec, ModelRole)> {
        let mut out = vec![
            (self.encoder.spec(), ModelRole::Acting),
            (self.transition.spec(), ModelRole::LearningOnly),
            (self.projection.spec(), ModelRole::LearningOnly),
        ];
        if self.variant() != SrlVariant::L2Online {
            out.push((self.target_encoder.spec(), ModelRole::LearningOnly));
        }
        out
    }

    pub fn cost(&self) -> CostReport {
        self.cost_models().into_iter().map(|(s, _)| CostReport::from(s)).sum()
    }
}
