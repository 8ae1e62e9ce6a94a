//! Agreement statistics and learning-order analysis for collections of
//! classifiers.
//!
//! The central object is a [`predlog::PredictionLog`]: a dense tensor of
//! predicted class ids indexed by (training extent, model, example),
//! recorded while an ensemble of models trains on a labeled dataset.
//! From sealed logs the [`metrics`] module derives per-example scores
//! (TP-agreement, agreement, accessibility), per-extent score histograms,
//! bi-modality coefficients and learned-epoch summaries. The
//! [`nullmodel`] module builds accuracy-matched independence baselines,
//! [`compare`] relates two collections through accuracy-matched overlap
//! counts and accessibility correlations, and [`learners`] provides
//! desk-scale trainers (fully connected ensembles and multi-class
//! AdaBoost with linear weak learners) that produce logs on the datasets
//! generated or ingested by [`datasets`]. The [`experiments`] module
//! wires these pieces into reproducible, seeded recipes that emit
//! plot-ready CSV bundles.

pub mod compare;
pub mod datasets;
pub mod experiments;
pub mod io_util;
pub use io_util as io;
pub mod learners;
pub mod metrics;
pub mod nullmodel;
pub mod predlog;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
    #[error("log size {cells} cells exceeds budget of {budget} cells")]
    BudgetExceeded { cells: u128, budget: u64 },
    #[error("{what} index {got} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        got: usize,
        limit: usize,
    },
    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: u32, num_classes: u16 },
    #[error("unfilled epoch {epoch_index}: log must be fully recorded first")]
    UnfilledEpoch { epoch_index: usize },
    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("duplicate cell (epoch {epoch_index}, model {model_index}, example {example_index})")]
    DuplicateCell {
        epoch_index: usize,
        model_index: usize,
        example_index: usize,
    },
    #[error("bad file format: {0}")]
    Format(String),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("non-finite loss in model {model_index} during epoch {epoch}")]
    NonFiniteLoss { model_index: usize, epoch: u64 },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
