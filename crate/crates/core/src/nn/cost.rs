use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use super::mlp::MlpSpec;

/// Multiply-accumulates of affine layers for one forward pass, and the
/// number of scalar parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CostReport {
    pub flops: u64,
    pub params: u64,
}

impl Add for CostReport {
    type Output = CostReport;

    fn add(self, rhs: Self) -> Self {
        CostReport {
            flops: self.flops + rhs.flops,
            params: self.params + rhs.params,
        }
    }
}

impl AddAssign for CostReport {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for CostReport {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

impl From<&MlpSpec> for CostReport {
    fn from(spec: &MlpSpec) -> Self {
        CostReport {
            flops: spec.macs(),
            params: spec.num_params(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Learning,
    Evaluation,
}

/// Whether a model sits on the action-selection path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelRole {
    Acting,
    LearningOnly,
}

pub fn count_cost<'a>(models: impl IntoIterator<Item = (&'a MlpSpec, ModelRole)>, phase: Phase) -> CostReport {
    models
        .into_iter()
        .filter(|(_, role)| phase == Phase::Learning || *role == ModelRole::Acting)
        .map(|(spec, _)| CostReport::from(spec))
        .fold(CostReport::default(), Add::add)
}
