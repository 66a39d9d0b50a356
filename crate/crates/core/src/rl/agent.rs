use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::common::{StateBatch, UpdateOutput, UpdateTrace};
use super::config::{AgentConfig, Algorithm};
use super::dqn::{argmax, Dqn};
use super::replay::{Action, ActionSpace, Batch, BatchActions};
use super::sac::{Sac, SacParams};
use super::td3::{Td3, Td3Params};
use crate::env::{ActionCommand, EnvAction, NUM_DISCRETE_ACTIONS};
use crate::error::{Error, Result};
use crate::nn::{count_cost, CostReport, Mlp, MlpSpec, ModelRole, Phase};
use crate::srl::{SrlConfig, SrlModels};

/// Width of the continuous velocity command.
pub const CONTINUOUS_ACTION_DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionMode {
    Explore,
    Exploit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Learner {
    Dqn(Dqn),
    Td3(Td3),
    Sac(Sac),
}

/// Losses from one training step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainStats {
    pub critic_loss: f64,
    pub actor_loss: Option<f64>,
    pub alpha_loss: Option<f64>,
    pub spr_loss: Option<f64>,
}

impl Action {
    pub fn to_env(&self) -> EnvAction {
        match self {
            Action::Discrete(i) => EnvAction::Discrete(*i),
            Action::Continuous(v) => EnvAction::Command(ActionCommand::from_normalized(v)),
        }
    }

    /// Normalized command components, whatever the action kind.
    pub fn normalized(&self) -> Vec<f64> {
        match self {
            Action::Continuous(v) => v.clone(),
            Action::Discrete(i) => ActionCommand::from_discrete(*i)
                .map(|c| c.to_normalized().to_vec())
                .unwrap_or_default(),
        }
    }
}

/// An off-policy learner with an optional learned state representation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Agent {
    config: AgentConfig,
    learner: Learner,
    srl: Option<SrlModels>,
    obs_dim: usize,
    space: ActionSpace,
    rng: ChaCha8Rng,
    env_steps: u64,
    updates: u64,
    #[serde(skip)]
    tracing: bool,
    #[serde(skip)]
    last_trace: Option<UpdateTrace>,
}

impl PartialEq for Agent {
    fn eq(&self, o: &Self) -> bool {
        self.config == o.config
            && self.learner == o.learner
            && self.srl == o.srl
            && self.obs_dim == o.obs_dim
            && self.space == o.space
            && self.rng == o.rng
            && self.env_steps == o.env_steps
            && self.updates == o.updates
    }
}

impl Agent {
    pub fn new(config: AgentConfig, obs_dim: usize, srl: Option<SrlConfig>, seed: u64) -> Result<Self> {
        config.validate()?;
        if obs_dim == 0 {
            return Err(Error::InvalidConfig("observation width must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = if config.algorithm.is_discrete() {
            ActionSpace::Discrete(NUM_DISCRETE_ACTIONS)
        } else {
            ActionSpace::Continuous(CONTINUOUS_ACTION_DIM)
        };
        let srl = match srl {
            Some(c) => Some(SrlModels::new(c, obs_dim, space.feature_dim(), &mut rng)?),
            None => None,
        };
        let state_dim = srl.as_ref().map_or(obs_dim, |s| s.latent_dim());
        let h = &config.hidden;
        let a = space.feature_dim();
        let learner = match config.algorithm {
            Algorithm::Dqn => Learner::Dqn(Dqn::new(state_dim, a, h, config.lr_critic, &mut rng)?),
            Algorithm::Td3 => Learner::Td3(Td3::new(state_dim, a, h, config.lr_actor, config.lr_critic, &mut rng)?),
            Algorithm::Sac => Learner::Sac(Sac::new(
                state_dim,
                a,
                h,
                [config.lr_actor, config.lr_critic, config.lr_alpha],
                config.init_alpha,
                &mut rng,
            )?),
        };
        Ok(Self {
            config,
            learner,
            srl,
            obs_dim,
            space,
            rng,
            env_steps: 0,
            updates: 0,
            tracing: false,
            last_trace: None,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn learner(&self) -> &Learner {
        &self.learner
    }

    pub fn learner_mut(&mut self) -> &mut Learner {
        &mut self.learner
    }

    pub fn srl(&self) -> Option<&SrlModels> {
        self.srl.as_ref()
    }

    pub fn srl_mut(&mut self) -> Option<&mut SrlModels> {
        self.srl.as_mut()
    }

    pub fn action_space(&self) -> ActionSpace {
        self.space
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Record the state matrices seen by each model during updates.
    pub fn set_tracing(&mut self, on: bool) {
        self.tracing = on;
        self.last_trace = None;
    }

    pub fn last_trace(&self) -> Option<&UpdateTrace> {
        self.last_trace.as_ref()
    }

    pub fn epsilon(&self) -> f64 {
        self.config.epsilon(self.env_steps)
    }

    /// State the learner consumes: the observation or its code.
    fn state_of(&self, obs: &[f64]) -> Result<Array2<f64>> {
        if obs.len() != self.obs_dim {
            return Err(Error::Shape(format!("observation width {} != {}", obs.len(), self.obs_dim)));
        }
        let x = ArrayView2::from_shape((1, obs.len()), obs).map_err(|e| Error::Shape(e.to_string()))?;
        match &self.srl {
            Some(srl) => srl.codes(x),
            None => Ok(x.to_owned()),
        }
    }

    pub fn random_action(&mut self) -> Action {
        match self.space {
            ActionSpace::Discrete(n) => Action::Discrete(self.rng.random_range(0..n)),
            ActionSpace::Continuous(d) => Action::Continuous((0..d).map(|_| self.rng.random_range(-1.0..=1.0)).collect()),
        }
    }

    pub fn select_action(&mut self, obs: &[f64], mode: ActionMode) -> Result<Action> {
        if mode == ActionMode::Explore && self.config.algorithm == Algorithm::Dqn {
            let eps = self.epsilon();
            if self.rng.random::<f64>() < eps {
                return Ok(self.random_action());
            }
        }
        let s = self.state_of(obs)?;
        let action = match (&self.learner, mode) {
            (Learner::Dqn(d), _) => Action::Discrete(argmax(d.q_values(s.view())?.row(0))),
            (Learner::Td3(t), m) => {
                let mut a = t.act(s.view())?.row(0).to_vec();
                if m == ActionMode::Explore {
                    for v in &mut a {
                        let n: f64 = self.rng.sample(StandardNormal);
                        *v = (*v + self.config.action_noise * n).clamp(-1.0, 1.0);
                    }
                }
                Action::Continuous(a)
            }
            (Learner::Sac(sac), ActionMode::Exploit) => Action::Continuous(sac.act_deterministic(s.view())?.row(0).to_vec()),
            (Learner::Sac(sac), ActionMode::Explore) => {
                let noise = Array2::from_shape_fn((1, sac.action_dim()), |_| self.rng.sample::<f64, _>(StandardNormal));
                Action::Continuous(sac.sample(s.view(), noise.view())?.action.row(0).to_vec())
            }
        };
        Ok(action)
    }

    /// Advance the environment step counter; handles hard target copies.
    pub fn observe_env_step(&mut self) -> Result<()> {
        self.env_steps += 1;
        if let Learner::Dqn(d) = &mut self.learner {
            if self.env_steps % self.config.target_update_interval == 0 {
                d.hard_update()?;
            }
        }
        Ok(())
    }

    /// Whether a gradient step is due after the current environment step.
    pub fn should_train(&self) -> bool {
        self.env_steps > self.config.warmup_steps && self.env_steps % self.config.train_freq == 0
    }

    fn run_learner(
        &mut self,
        b: &StateBatch,
        actions: &BatchActions,
        trace: Option<&mut UpdateTrace>,
    ) -> Result<UpdateOutput> {
        let c = &self.config;
        match (&mut self.learner, actions) {
            (Learner::Dqn(d), BatchActions::Discrete(a)) => d.update(b, a, c.gamma, trace),
            (Learner::Td3(t), BatchActions::Continuous(a)) => {
                let p = Td3Params {
                    gamma: c.gamma,
                    tau: c.tau,
                    target_noise: c.target_noise,
                    target_noise_clip: c.target_noise_clip,
                    policy_delay: c.policy_delay,
                };
                t.update(b, a.view(), &p, &mut self.rng, trace)
            }
            (Learner::Sac(s), BatchActions::Continuous(a)) => {
                let p = SacParams {
                    gamma: c.gamma,
                    tau: c.tau,
                    target_entropy: c.entropy_target(CONTINUOUS_ACTION_DIM),
                };
                s.update(b, a.view(), &p, &mut self.rng, trace)
            }
            _ => Err(Error::Shape("batch actions do not match the learner".into())),
        }
    }

    /// One gradient step on a replay batch. With a representation attached
    /// the encoder runs once; its codes feed the critic, the actor (detached)
    /// and the transition model.
    pub fn train_on_batch(&mut self, batch: &Batch) -> Result<TrainStats> {
        let mut trace = self.tracing.then(UpdateTrace::default);
        let stats = match self.srl.take() {
            None => {
                let b = StateBatch {
                    states: batch.obs.view(),
                    next_states: batch.next_obs.view(),
                    rewards: batch.rewards.view(),
                    terminals: batch.terminals.view(),
                };
                let out = self.run_learner(&b, &batch.actions, trace.as_mut());
                out.map(|o| TrainStats {
                    critic_loss: o.critic_loss,
                    actor_loss: o.actor_loss,
                    alpha_loss: o.alpha_loss,
                    spr_loss: None,
                })
            }
            Some(mut srl) => {
                let r = self.train_with_srl(&mut srl, batch, trace.as_mut());
                self.srl = Some(srl);
                r
            }
        }?;
        self.updates += 1;
        self.last_trace = trace;
        Ok(stats)
    }

    fn train_with_srl(&mut self, srl: &mut SrlModels, batch: &Batch, mut trace: Option<&mut UpdateTrace>) -> Result<TrainStats> {
        let noise = (srl.variant() == crate::srl::SrlVariant::Sto).then(|| {
            Array2::from_shape_fn((batch.len(), srl.latent_dim()), |_| self.rng.sample::<f64, _>(StandardNormal))
        });
        let enc = srl.encode(batch.obs.view(), noise.as_ref().map(|n| n.view()))?;
        let target = srl.target_codes(batch.next_obs.view())?;
        let b = StateBatch {
            states: enc.z.view(),
            next_states: target.z.view(),
            rewards: batch.rewards.view(),
            terminals: batch.terminals.view(),
        };
        let out = self.run_learner(&b, &batch.actions, trace.as_deref_mut())?;
        let feats = batch.actions.features(self.space);
        let s = srl.joint_step(&enc, out.d_states.view(), feats.view(), &target, trace)?;
        Ok(TrainStats {
            critic_loss: out.critic_loss,
            actor_loss: out.actor_loss,
            alpha_loss: out.alpha_loss,
            spr_loss: Some(s.spr_loss),
        })
    }

    /// Models with their role on the acting path.
    pub fn models(&self) -> Vec<(String, &Mlp, ModelRole)> {
        use ModelRole::{Acting, LearningOnly};
        let mut out: Vec<(String, &Mlp, ModelRole)> = Vec::new();
        match &self.learner {
            Learner::Dqn(d) => {
                out.push(("q".into(), &d.q, Acting));
                out.push(("q_target".into(), &d.q_target, LearningOnly));
            }
            Learner::Td3(t) => {
                out.push(("actor".into(), &t.actor, Acting));
                out.push(("critic1".into(), &t.critics[0], Acting));
                out.push(("critic2".into(), &t.critics[1], LearningOnly));
                out.push(("actor_target".into(), &t.actor_target, LearningOnly));
                out.push(("critic1_target".into(), &t.critic_targets[0], LearningOnly));
                out.push(("critic2_target".into(), &t.critic_targets[1], LearningOnly));
            }
            Learner::Sac(s) => {
                out.push(("actor".into(), &s.actor, Acting));
                out.push(("critic1".into(), &s.critics[0], Acting));
                out.push(("critic2".into(), &s.critics[1], LearningOnly));
                out.push(("critic1_target".into(), &s.critic_targets[0], LearningOnly));
                out.push(("critic2_target".into(), &s.critic_targets[1], LearningOnly));
            }
        }
        if let Some(srl) = &self.srl {
            out.push(("encoder".into(), &srl.encoder, Acting));
            out.push(("transition".into(), &srl.transition, LearningOnly));
            out.push(("projection".into(), &srl.projection, LearningOnly));
            if srl.variant() != crate::srl::SrlVariant::L2Online {
                out.push(("target_encoder".into(), &srl.target_encoder, LearningOnly));
            }
        }
        out
    }

    pub fn cost(&self, phase: Phase) -> CostReport {
        let models = self.models();
        let specs: Vec<(&MlpSpec, ModelRole)> = models.iter().map(|(_, m, r)| (m.spec(), *r)).collect();
        count_cost(specs, phase)
    }
}
