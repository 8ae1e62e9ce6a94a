//! Desk-scale trainers that produce prediction logs: fully connected
//! neural ensembles (non-linear and linear) and multi-class AdaBoost
//! with linear weak learners.
//!
//! Determinism contract: identical (config, seed, data) produce
//! identical prediction logs regardless of how many workers run the
//! ensemble. Each ensemble member draws from its own ChaCha substream
//! (`seed ^ model_index`), and all reductions happen in fixed order.

mod adaboost;
mod mlp;

pub use adaboost::{samme_alpha, train_adaboost, BoostConfig, BoostModel, BoostRound, BoostRun};
pub use mlp::{train_mlp_ensemble, Mlp};

use serde::{Deserialize, Serialize};

use crate::datasets::LabeledDataset;
use crate::predlog::{Manifest, Split as LogSplit};
use crate::{Error, Result};

/// Hidden-layer activation of the fully connected learners. `Identity`
/// turns the network into a composition of affine maps, the linear
/// variant used for the linear-network experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
    Tanh,
}

impl Activation {
    fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation output.
    fn derivative_from_output(&self, out: f64) -> f64 {
        match self {
            Activation::Relu => {
                if out > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - out * out,
        }
    }
}

/// Configuration of one fully connected ensemble member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    /// Hidden layer widths; the input and output widths come from the
    /// data. Empty means a single softmax layer.
    pub layer_widths: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    /// Learning rate is divided by this factor every `decay_every`
    /// epochs; 1.0 disables decay.
    #[serde(default = "default_decay_factor")]
    pub lr_decay_factor: f64,
    /// Decay interval in epochs; 0 disables decay.
    #[serde(default)]
    pub decay_every: u64,
    pub batch_size: usize,
    /// Training extents (epoch counts) at which predictions are logged.
    pub epoch_schedule: Vec<u64>,
    #[serde(default)]
    pub dropout_rate: f64,
    pub seed: u64,
    /// Retrain from scratch for every extent instead of snapshotting a
    /// single run, with a fresh substream per extent.
    #[serde(default)]
    pub retrain_per_extent: bool,
}

fn default_decay_factor() -> f64 {
    1.0
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layer_widths.contains(&0) {
            return Err(Error::InvalidConfig("zero-width hidden layer".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.lr_decay_factor >= 1.0 && self.lr_decay_factor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lr_decay_factor must be >= 1, got {}",
                self.lr_decay_factor
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.epoch_schedule.is_empty()
            || !self.epoch_schedule.windows(2).all(|w| w[0] < w[1])
        {
            return Err(Error::InvalidConfig(format!(
                "epoch_schedule must be non-empty and strictly increasing, got {:?}",
                self.epoch_schedule
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidConfig(format!(
                "dropout_rate must be in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        Ok(())
    }
}

/// Anything that maps a feature vector to a class id. Prediction is the
/// argmax of the model's class scores with ties broken to the lowest
/// class id.
pub trait Classifier {
    fn input_dim(&self) -> usize;
    fn num_classes(&self) -> u16;
    /// Scores for a single validated example.
    fn class_scores(&self, features: &[f64]) -> Vec<f64>;

    fn predict(&self, features: &[f64]) -> Result<u16> {
        if features.len() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} features, got {}",
                self.input_dim(),
                features.len()
            )));
        }
        if !features.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("features passed to predict".into()));
        }
        Ok(argmax_low(&self.class_scores(features)))
    }
}

/// Index of the largest score; ties go to the lowest index.
pub(crate) fn argmax_low(scores: &[f64]) -> u16 {
    let mut best = 0usize;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best as u16
}

/// Shared pre-flight checks for the trainers: the training set must be a
/// real classification problem, and every eval set must share its
/// feature dimension. Eval sets either share the training classes or
/// carry placeholder labels (`num_classes == 1`), in which case the log
/// is tagged as unlabeled.
pub(crate) fn check_train_and_eval(
    train: &LabeledDataset,
    eval_sets: &[&LabeledDataset],
) -> Result<()> {
    if train.num_classes < 2 {
        return Err(Error::InvalidConfig(
            "training set needs at least 2 classes".into(),
        ));
    }
    for eval in eval_sets {
        if eval.dim() != train.dim() {
            return Err(Error::DimensionMismatch(format!(
                "eval set {} has dim {}, train has {}",
                eval.provenance,
                eval.dim(),
                train.dim()
            )));
        }
        if eval.num_classes != 1 && eval.num_classes != train.num_classes {
            return Err(Error::DimensionMismatch(format!(
                "eval set {} has {} classes, train has {}",
                eval.provenance, eval.num_classes, train.num_classes
            )));
        }
    }
    Ok(())
}

/// Manifest for the log of one prediction set, shared by both trainers.
pub(crate) fn log_manifest(
    set: &LabeledDataset,
    train: &LabeledDataset,
    schedule: &[u64],
    num_models: usize,
    learner_tag: String,
    seed: u64,
) -> Manifest {
    let split = if set.num_classes == 1 {
        LogSplit::Unlabeled
    } else {
        set.split.into()
    };
    Manifest {
        dataset_id: set.provenance.clone(),
        split,
        num_classes: train.num_classes,
        num_examples: set.len(),
        num_models,
        epoch_schedule: schedule.to_vec(),
        learner_tag,
        seed,
    }
}
