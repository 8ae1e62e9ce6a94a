//! Generation, loading, and transformation of the labeled datasets the
//! experiments run on.
//!
//! Everything here is deterministic given (config, seed): generators
//! draw from a ChaCha stream seeded by the caller, and transformations
//! derive their randomness the same way. Datasets are immutable after
//! creation and safe to share across workers.

mod generate;
mod io;
mod transform;

pub use generate::{gen_gabor, gen_gaussian, gen_noise, gabor_class_info, GaborClassInfo, GaborConfig};
pub use io::{export_features_csv, load_features_csv, load_idx};
pub use transform::{normalize_per_feature, partition, shuffle_labels};

use ndarray::Array2;

use crate::predlog::Split as LogSplit;
use crate::{Error, Result};

/// Which side of the train/test divide a dataset belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl From<Split> for LogSplit {
    fn from(s: Split) -> LogSplit {
        match s {
            Split::Train => LogSplit::Train,
            Split::Test => LogSplit::Test,
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Split::Train => write!(f, "train"),
            Split::Test => write!(f, "test"),
        }
    }
}

/// Feature vectors with class labels.
///
/// `num_classes` of 1 marks a dataset whose labels are placeholders
/// (e.g. noise images scored only with label-free metrics).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: Array2<f64>,
    pub labels: Vec<u16>,
    pub num_classes: u16,
    pub split: Split,
    pub provenance: String,
}

impl LabeledDataset {
    /// Validate and construct. Labels must fit `num_classes` and every
    /// feature must be finite.
    pub fn new(
        features: Array2<f64>,
        labels: Vec<u16>,
        num_classes: u16,
        split: Split,
        provenance: String,
    ) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::LengthMismatch {
                what: "labels",
                expected: features.nrows(),
                got: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as u32 >= num_classes as u32) {
            return Err(Error::LabelOutOfRange {
                label: bad as u32,
                num_classes,
            });
        }
        if !features.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "features of dataset {provenance}"
            )));
        }
        Ok(LabeledDataset {
            features,
            labels,
            num_classes,
            split,
            provenance,
        })
    }

    /// Number of examples.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Feature dimension.
    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Dataset restricted to the given example indices, in order.
    pub fn select(&self, indices: &[usize], provenance: String) -> Result<LabeledDataset> {
        for &i in indices {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange {
                    what: "example",
                    got: i,
                    limit: self.len(),
                });
            }
        }
        let features = ndarray::Array2::from_shape_fn((indices.len(), self.dim()), |(r, c)| {
            self.features[[indices[r], c]]
        });
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        LabeledDataset::new(features, labels, self.num_classes, self.split, provenance)
    }
}
