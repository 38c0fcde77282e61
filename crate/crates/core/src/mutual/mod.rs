//! Mutual learning between the rhetorical and topic matrices.
//!
//! The local aggregator pushes rhetorical structure into the topic matrix
//! (`local_flow` -> `local_rhetorical` -> `rhetoric_enhanced_topic`); the
//! global aggregator pushes topic structure into the rhetorical matrix
//! (`topic_assisted_rhetorical`). Training aligns the two fused matrices
//! under a penalized squared-error objective, and `common_matrix` is what
//! gets decoded afterwards.

mod fuse;
mod objective;
mod params;
mod train;

use serde::{Deserialize, Serialize};

pub use fuse::{
    common_matrix, fuse, fused_mean, local_flow, local_rhetorical, rhetoric_enhanced_topic, topic_assisted_rhetorical,
};
pub use objective::{gradients, loss, penalties};
pub use params::{Adam, FlowMode, ModelParams, ParamGrads};
pub use train::{train, train_on_pairs, EpochRecord, TrainOutcome};

use crate::{Error, Result, ScoreMatrix};

/// The two fused matrices of one dialogue.
#[derive(Clone, Debug, PartialEq)]
pub struct FusedPair {
    /// Rhetoric-enhanced topic matrix.
    pub a_top_rhe: ScoreMatrix,
    /// Topic-assisted rhetorical matrix.
    pub a_rhe_top: ScoreMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub n_max: usize,
    pub max_train_turns: usize,
    pub flow_mode: FlowMode,
    /// Means at or below this value make the penalties undefined; the step is skipped.
    pub mean_epsilon: f64,
    /// Share of the training corpus held out for early stopping when no validation split is given.
    pub holdout_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 3e-6,
            lambda1: 1e-3,
            lambda2: 1e-3,
            max_epochs: 20,
            patience: 3,
            seed: 42,
            n_max: 24,
            max_train_turns: 18,
            flow_mode: FlowMode::Scalar,
            mean_epsilon: 1e-6,
            holdout_fraction: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Invalid(format!("train config: {what}")));
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return bad("penalty coefficients must be non-negative");
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return bad("max_epochs and patience must be positive");
        }
        if self.patience > self.max_epochs {
            return bad("patience cannot exceed max_epochs");
        }
        if self.max_train_turns < 2 || self.max_train_turns > self.n_max {
            return bad("max_train_turns must lie in [2, n_max]");
        }
        if !(self.mean_epsilon > 0.0) {
            return bad("mean_epsilon must be positive");
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return bad("holdout_fraction must lie in [0, 1)");
        }
        Ok(())
    }
}
