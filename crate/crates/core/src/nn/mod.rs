//! Small dense-network kernel: MLPs with hand-written backward passes,
//! Adam, Polyak averaging, Gaussian policy heads and cost accounting.

mod adam;
mod cost;
mod gaussian;
pub mod io;
mod mlp;
mod polyak;

pub use adam::{Adam, AdamConfig};
pub use cost::{count_cost, CostReport, ModelRole, Phase};
pub use gaussian::{gaussian_sample, squashed_sample, GaussianSample, SquashedSample, LOG_STD_MAX, LOG_STD_MIN};
pub use mlp::{join_head, split_head, Activation, ForwardCache, Gradients, Head, Linear, LayerNormParams, Mlp, MlpSpec, Params, LAYER_NORM_EPS, LEAKY_SLOPE};
pub use polyak::polyak_update;
