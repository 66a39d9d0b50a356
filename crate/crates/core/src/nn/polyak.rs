use super::mlp::Params;
use crate::error::{Error, Result};

/// `target <- (1 - mix) * target + mix * online`; `mix` is the online
/// fraction, so `mix = 1` is a hard copy.
pub fn polyak_update(target: &mut Params, online: &Params, mix: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&mix) {
        return Err(Error::InvalidConfig(format!("polyak mix {mix} outside [0, 1]")));
    }
    if !target.same_shape(online) {
        return Err(Error::Shape("polyak target and online shapes differ".into()));
    }
    for (t, o) in target.slices_mut().into_iter().zip(online.slices()) {
        if mix == 1.0 {
            t.copy_from_slice(o);
        } else {
            for (a, b) in t.iter_mut().zip(o) {
                *a = (1.0 - mix) * *a + mix * b;
            }
        }
    }
    Ok(())
}
