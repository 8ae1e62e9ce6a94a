//! Prediction logs: the epoch x model x example tensor of predicted
//! class ids that every metric in this crate reads.
//!
//! A log is created unfilled, populated row by row (one row = the
//! predictions of one model on every example at one training extent),
//! and then treated as immutable. Reads that touch an unfilled extent
//! are hard errors rather than silent zeros, so no downstream statistic
//! can ever be computed from a partially recorded tensor.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::io_util::atomic_write;
use crate::{Error, Result};

/// Magic bytes opening the binary log format.
const MAGIC: &[u8; 4] = b"PLOG";
/// Current binary format version.
const FORMAT_VERSION: u32 = 1;
/// Default cap on tensor cells (2 GiB of u16 cells).
pub const DEFAULT_CELL_BUDGET: u64 = 1 << 30;
/// Class ids are stored as u16, capping the number of classes.
pub const MAX_CLASSES: u32 = u16::MAX as u32;

/// Which examples a log was recorded on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    Unlabeled,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Split::Train => write!(f, "train"),
            Split::Test => write!(f, "test"),
            Split::Unlabeled => write!(f, "unlabeled"),
        }
    }
}

/// Identity and shape of a prediction log.
///
/// `epoch_schedule` holds the training extents at which predictions were
/// recorded; the unit is epochs for SGD learners and weak-learner counts
/// for boosting. `learner_tag` together with `seed` is expected to be
/// enough to reproduce the log when re-run with the built-in learners,
/// so the trainers serialize their full config into the tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset_id: String,
    pub split: Split,
    pub num_classes: u16,
    pub num_examples: usize,
    pub num_models: usize,
    pub epoch_schedule: Vec<u64>,
    pub learner_tag: String,
    pub seed: u64,
}

impl Manifest {
    /// Check the structural invariants: K >= 2, M >= 1, N >= 1 and a
    /// non-empty strictly increasing extent schedule.
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::InvalidManifest(format!(
                "num_classes must be >= 2, got {}",
                self.num_classes
            )));
        }
        if self.num_examples == 0 {
            return Err(Error::InvalidManifest("num_examples must be >= 1".into()));
        }
        if self.num_models == 0 {
            return Err(Error::InvalidManifest("num_models must be >= 1".into()));
        }
        if self.epoch_schedule.is_empty() {
            return Err(Error::InvalidManifest("epoch_schedule is empty".into()));
        }
        if !self.epoch_schedule.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidManifest(format!(
                "epoch_schedule must be strictly increasing, got {:?}",
                self.epoch_schedule
            )));
        }
        Ok(())
    }

    /// Number of logged extents.
    pub fn num_epochs(&self) -> usize {
        self.epoch_schedule.len()
    }

    /// Total tensor cells, computed without overflow.
    pub fn cell_count(&self) -> u128 {
        self.num_epochs() as u128 * self.num_models as u128 * self.num_examples as u128
    }
}

/// Per-epoch binary correctness of every (model, example) pair, stored
/// as a packed bit matrix.
#[derive(Debug, Clone)]
pub struct CorrectnessMatrix {
    epoch_index: usize,
    num_models: usize,
    num_examples: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl CorrectnessMatrix {
    fn new(epoch_index: usize, num_models: usize, num_examples: usize) -> Self {
        let words_per_row = num_examples.div_ceil(64);
        CorrectnessMatrix {
            epoch_index,
            num_models,
            num_examples,
            words_per_row,
            bits: vec![0u64; words_per_row * num_models],
        }
    }

    pub fn epoch_index(&self) -> usize {
        self.epoch_index
    }

    pub fn num_models(&self) -> usize {
        self.num_models
    }

    pub fn num_examples(&self) -> usize {
        self.num_examples
    }

    fn set(&mut self, model: usize, example: usize) {
        let w = model * self.words_per_row + example / 64;
        self.bits[w] |= 1u64 << (example % 64);
    }

    /// Whether model `model` classified example `example` correctly.
    pub fn get(&self, model: usize, example: usize) -> bool {
        assert!(model < self.num_models && example < self.num_examples);
        let w = model * self.words_per_row + example / 64;
        self.bits[w] >> (example % 64) & 1 == 1
    }

    /// Number of correct classifications in one model's row.
    pub fn row_ones(&self, model: usize) -> u64 {
        assert!(model < self.num_models);
        let row = &self.bits[model * self.words_per_row..(model + 1) * self.words_per_row];
        row.iter().map(|w| w.count_ones() as u64).sum()
    }
}

/// Dense tensor of predicted class ids with per-(epoch, model) fill
/// tracking. Layout is epoch-major, then model, then example, so metric
/// passes scan whole epoch slabs sequentially.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionLog {
    manifest: Manifest,
    predictions: Vec<u16>,
    filled: Vec<bool>,
}

impl PredictionLog {
    /// Allocate an unfilled log with the default cell budget.
    pub fn new(manifest: Manifest) -> Result<Self> {
        Self::with_cell_budget(manifest, DEFAULT_CELL_BUDGET)
    }

    /// Allocate an unfilled log, failing if the tensor would exceed
    /// `budget` cells.
    pub fn with_cell_budget(manifest: Manifest, budget: u64) -> Result<Self> {
        manifest.validate()?;
        let cells = manifest.cell_count();
        if cells > budget as u128 {
            return Err(Error::BudgetExceeded { cells, budget });
        }
        let rows = manifest.num_epochs() * manifest.num_models;
        Ok(PredictionLog {
            predictions: vec![0u16; cells as usize],
            filled: vec![false; rows],
            manifest,
        })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    fn row_index(&self, epoch_index: usize, model_index: usize) -> Result<usize> {
        if epoch_index >= self.manifest.num_epochs() {
            return Err(Error::IndexOutOfRange {
                what: "epoch",
                got: epoch_index,
                limit: self.manifest.num_epochs(),
            });
        }
        if model_index >= self.manifest.num_models {
            return Err(Error::IndexOutOfRange {
                what: "model",
                got: model_index,
                limit: self.manifest.num_models,
            });
        }
        Ok(epoch_index * self.manifest.num_models + model_index)
    }

    /// Store one model's predictions at one extent. Re-recording a row
    /// replaces it.
    pub fn record_row(
        &mut self,
        epoch_index: usize,
        model_index: usize,
        predicted_labels: &[u16],
    ) -> Result<()> {
        let row = self.row_index(epoch_index, model_index)?;
        let m = self.manifest.num_examples;
        if predicted_labels.len() != m {
            return Err(Error::LengthMismatch {
                what: "predicted_labels",
                expected: m,
                got: predicted_labels.len(),
            });
        }
        let k = self.manifest.num_classes;
        if let Some(&bad) = predicted_labels.iter().find(|&&l| l >= k) {
            return Err(Error::LabelOutOfRange {
                label: bad as u32,
                num_classes: k,
            });
        }
        self.predictions[row * m..(row + 1) * m].copy_from_slice(predicted_labels);
        self.filled[row] = true;
        Ok(())
    }

    /// Whether every model row of this extent has been recorded.
    pub fn epoch_filled(&self, epoch_index: usize) -> bool {
        let n = self.manifest.num_models;
        epoch_index < self.manifest.num_epochs()
            && self.filled[epoch_index * n..(epoch_index + 1) * n]
                .iter()
                .all(|&f| f)
    }

    /// Whether every cell of the tensor has been recorded.
    pub fn fully_filled(&self) -> bool {
        self.filled.iter().all(|&f| f)
    }

    fn ensure_epoch_filled(&self, epoch_index: usize) -> Result<()> {
        if epoch_index >= self.manifest.num_epochs() {
            return Err(Error::IndexOutOfRange {
                what: "epoch",
                got: epoch_index,
                limit: self.manifest.num_epochs(),
            });
        }
        if !self.epoch_filled(epoch_index) {
            return Err(Error::UnfilledEpoch { epoch_index });
        }
        Ok(())
    }

    fn ensure_fully_filled(&self) -> Result<()> {
        for e in 0..self.manifest.num_epochs() {
            self.ensure_epoch_filled(e)?;
        }
        Ok(())
    }

    /// The N x M slab of one filled extent, model-major.
    pub fn epoch_slab(&self, epoch_index: usize) -> Result<&[u16]> {
        self.ensure_epoch_filled(epoch_index)?;
        let n = self.manifest.num_models;
        let m = self.manifest.num_examples;
        let start = epoch_index * n * m;
        Ok(&self.predictions[start..start + n * m])
    }

    /// One model's predictions at one filled extent.
    pub fn model_row(&self, epoch_index: usize, model_index: usize) -> Result<&[u16]> {
        let row = self.row_index(epoch_index, model_index)?;
        if !self.filled[row] {
            return Err(Error::UnfilledEpoch { epoch_index });
        }
        let m = self.manifest.num_examples;
        Ok(&self.predictions[row * m..(row + 1) * m])
    }

    fn check_labels(&self, labels: &[u16]) -> Result<()> {
        if labels.len() != self.manifest.num_examples {
            return Err(Error::LengthMismatch {
                what: "labels",
                expected: self.manifest.num_examples,
                got: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= self.manifest.num_classes) {
            return Err(Error::LabelOutOfRange {
                label: bad as u32,
                num_classes: self.manifest.num_classes,
            });
        }
        Ok(())
    }

    /// Binary correctness of every (model, example) pair at one extent.
    pub fn correctness(&self, labels: &[u16], epoch_index: usize) -> Result<CorrectnessMatrix> {
        self.check_labels(labels)?;
        let slab = self.epoch_slab(epoch_index)?;
        let (n, m) = (self.manifest.num_models, self.manifest.num_examples);
        let mut out = CorrectnessMatrix::new(epoch_index, n, m);
        for i in 0..n {
            let row = &slab[i * m..(i + 1) * m];
            for (j, (&p, &y)) in row.iter().zip(labels).enumerate() {
                if p == y {
                    out.set(i, j);
                }
            }
        }
        Ok(out)
    }

    /// Fraction of examples one model classifies correctly at one extent.
    pub fn accuracy(&self, labels: &[u16], epoch_index: usize, model_index: usize) -> Result<f64> {
        self.check_labels(labels)?;
        let row = self.model_row(epoch_index, model_index)?;
        let hits = row.iter().zip(labels).filter(|(p, y)| p == y).count();
        Ok(hits as f64 / self.manifest.num_examples as f64)
    }

    /// New log holding only the given models, in the given order. Fill
    /// state is carried over row by row.
    pub fn subset_models(&self, model_indices: &[usize]) -> Result<PredictionLog> {
        if model_indices.is_empty() {
            return Err(Error::InvalidManifest("model subset is empty".into()));
        }
        for &i in model_indices {
            if i >= self.manifest.num_models {
                return Err(Error::IndexOutOfRange {
                    what: "model",
                    got: i,
                    limit: self.manifest.num_models,
                });
            }
        }
        let mut manifest = self.manifest.clone();
        manifest.num_models = model_indices.len();
        manifest.learner_tag = format!("{}+subset", self.manifest.learner_tag);
        let mut out = PredictionLog::new(manifest)?;
        let m = self.manifest.num_examples;
        for e in 0..self.manifest.num_epochs() {
            for (new_i, &old_i) in model_indices.iter().enumerate() {
                let old_row = e * self.manifest.num_models + old_i;
                if self.filled[old_row] {
                    let src = &self.predictions[old_row * m..(old_row + 1) * m];
                    out.record_row(e, new_i, src)?;
                }
            }
        }
        Ok(out)
    }

    /// Write the binary format: `PLOG`, version, manifest JSON, then the
    /// tensor as little-endian u16 in (epoch, model, example) order.
    /// Requires a fully filled log.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.ensure_fully_filled()?;
        atomic_write(path, |w| {
            w.write_all(MAGIC)?;
            w.write_all(&FORMAT_VERSION.to_le_bytes())?;
            let manifest = serde_json::to_vec(&self.manifest)?;
            w.write_all(&(manifest.len() as u64).to_le_bytes())?;
            w.write_all(&manifest)?;
            let mut buf = Vec::with_capacity(64 * 1024);
            for chunk in self.predictions.chunks(32 * 1024) {
                buf.clear();
                for &p in chunk {
                    buf.extend_from_slice(&p.to_le_bytes());
                }
                w.write_all(&buf)?;
            }
            Ok(())
        })
    }

    /// Read a log written by [`PredictionLog::save`].
    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        reader.read_exact(&mut magic).map_err(|_| truncated())?;
        if &magic != MAGIC {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                magic, MAGIC
            )));
        }
        let mut word = [0u8; 4];
        reader.read_exact(&mut word).map_err(|_| truncated())?;
        let version = u32::from_le_bytes(word);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported version {version}, expected {FORMAT_VERSION}"
            )));
        }
        let mut len_bytes = [0u8; 8];
        reader.read_exact(&mut len_bytes).map_err(|_| truncated())?;
        let manifest_len = u64::from_le_bytes(len_bytes) as usize;
        let mut manifest_buf = vec![0u8; manifest_len];
        reader
            .read_exact(&mut manifest_buf)
            .map_err(|_| truncated())?;
        let manifest: Manifest = serde_json::from_slice(&manifest_buf)?;
        let mut log = PredictionLog::new(manifest)?;

        let cells = log.predictions.len();
        let mut raw = vec![0u8; cells * 2];
        reader.read_exact(&mut raw).map_err(|_| truncated())?;
        let mut trailing = [0u8; 1];
        if reader.read(&mut trailing)? != 0 {
            return Err(Error::Format("trailing bytes after tensor".into()));
        }
        let k = log.manifest.num_classes;
        for (cell, bytes) in log.predictions.iter_mut().zip(raw.chunks_exact(2)) {
            let v = u16::from_le_bytes([bytes[0], bytes[1]]);
            if v >= k {
                return Err(Error::LabelOutOfRange {
                    label: v as u32,
                    num_classes: k,
                });
            }
            *cell = v;
        }
        log.filled.fill(true);
        Ok(log)
    }

    /// Write the text format: one `epoch_index,model_index,example_index,
    /// predicted_label` row per cell. The manifest is not included; it
    /// travels separately as JSON.
    pub fn export_csv(&self, path: &Path) -> Result<()> {
        self.ensure_fully_filled()?;
        let (n, m) = (self.manifest.num_models, self.manifest.num_examples);
        atomic_write(path, |w| {
            writeln!(w, "epoch_index,model_index,example_index,predicted_label")?;
            for e in 0..self.manifest.num_epochs() {
                for i in 0..n {
                    let row = &self.predictions[(e * n + i) * m..(e * n + i + 1) * m];
                    for (j, &p) in row.iter().enumerate() {
                        writeln!(w, "{e},{i},{j},{p}")?;
                    }
                }
            }
            Ok(())
        })
    }

    /// Fill a log from the CSV cell format. Rows may arrive in any
    /// order; duplicates are rejected. A model row only counts as filled
    /// once all of its cells have been seen, so a partial file yields a
    /// log whose unfilled extents refuse to be read.
    pub fn import_csv(path: &Path, manifest: Manifest) -> Result<Self> {
        let mut log = PredictionLog::new(manifest)?;
        let (n, m, k) = (
            log.manifest.num_models,
            log.manifest.num_examples,
            log.manifest.num_classes,
        );
        let num_epochs = log.manifest.num_epochs();
        let mut seen = vec![0u64; log.predictions.len().div_ceil(64)];
        let mut row_counts = vec![0usize; num_epochs * n];

        let reader = BufReader::new(File::open(path)?);
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty CSV".into()))??;
        if header.trim() != "epoch_index,model_index,example_index,predicted_label" {
            return Err(Error::Format(format!("unexpected CSV header: {header}")));
        }
        for (line_no, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let mut next = |name: &str| -> Result<u64> {
                fields
                    .next()
                    .ok_or_else(|| {
                        Error::Format(format!("line {}: missing field {name}", line_no + 2))
                    })?
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Format(format!("line {}: bad {name}", line_no + 2)))
            };
            let e = next("epoch_index")? as usize;
            let i = next("model_index")? as usize;
            let j = next("example_index")? as usize;
            let p = next("predicted_label")?;
            if fields.next().is_some() {
                return Err(Error::Format(format!(
                    "line {}: too many fields",
                    line_no + 2
                )));
            }
            if e >= num_epochs {
                return Err(Error::IndexOutOfRange {
                    what: "epoch",
                    got: e,
                    limit: num_epochs,
                });
            }
            if i >= n {
                return Err(Error::IndexOutOfRange {
                    what: "model",
                    got: i,
                    limit: n,
                });
            }
            if j >= m {
                return Err(Error::IndexOutOfRange {
                    what: "example",
                    got: j,
                    limit: m,
                });
            }
            if p >= k as u64 {
                return Err(Error::LabelOutOfRange {
                    label: p.min(u32::MAX as u64) as u32,
                    num_classes: k,
                });
            }
            let cell = (e * n + i) * m + j;
            let (word, bit) = (cell / 64, cell % 64);
            if seen[word] >> bit & 1 == 1 {
                return Err(Error::DuplicateCell {
                    epoch_index: e,
                    model_index: i,
                    example_index: j,
                });
            }
            seen[word] |= 1 << bit;
            log.predictions[cell] = p as u16;
            row_counts[e * n + i] += 1;
        }
        for (row, &count) in row_counts.iter().enumerate() {
            log.filled[row] = count == m;
        }
        Ok(log)
    }
}

fn truncated() -> Error {
    Error::Format("truncated file".into())
}
