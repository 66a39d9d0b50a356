//! Self-predictive state representations: an encoder trained jointly with
//! the critic plus a latent transition model that predicts the next code.

mod config;
mod losses;
mod models;

pub use config::{SrlConfig, SrlVariant};
pub use losses::{infonce_loss, kl_diag_gaussian, l2_loss};
pub use models::{Encoding, JointGrads, LatentGaussian, SprEval, SrlModels, SrlStats, TargetCodes};
