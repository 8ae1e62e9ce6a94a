//! Agreement statistics over sealed prediction logs.
//!
//! All scores are per-example reals in [0, 1]. TP-agreement is the
//! fraction of models classifying an example correctly at one extent
//! (the column average of the correctness matrix); agreement is the
//! largest fraction of models predicting the same label, defined
//! without ground truth; accessibility is the mean TP-agreement over
//! the whole extent schedule. The bi-modality coefficient is Pearson's
//! kurtosis - skewness^2 - 1 with raw (non-excess) kurtosis, so a
//! normal sample scores near 2 and any two-point distribution scores 0.

mod export;

pub use export::{export_histogram_csv, export_learned_epoch_boxes_csv, export_score_csv};

use crate::predlog::PredictionLog;
use crate::{Error, Result};

/// Which score a [`ScoreVector`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    TpAgreement,
    Agreement,
    Accessibility,
}

/// One real score per example.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub values: Vec<f64>,
    pub kind: ScoreKind,
    /// Index into the log's extent schedule; `None` for scores that
    /// aggregate over every extent.
    pub epoch_index: Option<usize>,
}

/// Extent x bin count matrix: row `e` is the histogram of a score at
/// extent `e` over equal-width bins covering [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramMatrix {
    pub counts: Vec<Vec<u64>>,
    pub bin_edges: Vec<f64>,
}

/// Summary of one accessibility-ordered bin of examples: the median of
/// per-example median learned extents, with a notched-box confidence
/// interval (median +- 1.57 * IQR / sqrt(n)).
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedEpochBin {
    pub bin_index: usize,
    pub count: usize,
    pub median: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

fn check_labels(log: &PredictionLog, labels: &[u16]) -> Result<()> {
    let manifest = log.manifest();
    if labels.len() != manifest.num_examples {
        return Err(Error::LengthMismatch {
            what: "labels",
            expected: manifest.num_examples,
            got: labels.len(),
        });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= manifest.num_classes) {
        return Err(Error::LabelOutOfRange {
            label: bad as u32,
            num_classes: manifest.num_classes,
        });
    }
    Ok(())
}

/// Per-example average correctness of the collection at one extent.
pub fn tp_agreement(log: &PredictionLog, labels: &[u16], epoch_index: usize) -> Result<ScoreVector> {
    check_labels(log, labels)?;
    let slab = log.epoch_slab(epoch_index)?;
    let n = log.manifest().num_models;
    let m = log.manifest().num_examples;
    let mut hits = vec![0u32; m];
    for i in 0..n {
        let row = &slab[i * m..(i + 1) * m];
        for (h, (&p, &y)) in hits.iter_mut().zip(row.iter().zip(labels)) {
            *h += u32::from(p == y);
        }
    }
    Ok(ScoreVector {
        values: hits.iter().map(|&h| h as f64 / n as f64).collect(),
        kind: ScoreKind::TpAgreement,
        epoch_index: Some(epoch_index),
    })
}

/// Per-example largest fraction of models that predict the same label
/// at one extent. Needs no ground truth.
pub fn agreement(log: &PredictionLog, epoch_index: usize) -> Result<ScoreVector> {
    let slab = log.epoch_slab(epoch_index)?;
    let n = log.manifest().num_models;
    let m = log.manifest().num_examples;
    let k = log.manifest().num_classes as usize;
    let mut counts = vec![0u32; k];
    let mut touched: Vec<u16> = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(m);
    for j in 0..m {
        let mut best = 0u32;
        for i in 0..n {
            let p = slab[i * m + j];
            let c = &mut counts[p as usize];
            if *c == 0 {
                touched.push(p);
            }
            *c += 1;
            if *c > best {
                best = *c;
            }
        }
        values.push(best as f64 / n as f64);
        for &t in &touched {
            counts[t as usize] = 0;
        }
        touched.clear();
    }
    Ok(ScoreVector {
        values,
        kind: ScoreKind::Agreement,
        epoch_index: Some(epoch_index),
    })
}

/// Per-example mean TP-agreement over every extent in the schedule.
/// Requires all extents to be recorded.
pub fn accessibility(log: &PredictionLog, labels: &[u16]) -> Result<ScoreVector> {
    let num_epochs = log.manifest().num_epochs();
    let m = log.manifest().num_examples;
    let mut sums = vec![0.0f64; m];
    for e in 0..num_epochs {
        let tpa = tp_agreement(log, labels, e)?;
        for (s, v) in sums.iter_mut().zip(&tpa.values) {
            *s += v;
        }
    }
    Ok(ScoreVector {
        values: sums.iter().map(|s| s / num_epochs as f64).collect(),
        kind: ScoreKind::Accessibility,
        epoch_index: None,
    })
}

/// Pearson's bi-modality coefficient: raw kurtosis - skewness^2 - 1,
/// using population (1/n) moments. Lower is more bi-modal; any
/// two-point distribution scores exactly 0 and a normal sample scores
/// close to 2.
pub fn bimodality(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::Degenerate("bimodality needs at least two values"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if m2 <= 0.0 {
        return Err(Error::Degenerate("zero variance"));
    }
    let skew = m3 / m2.powf(1.5);
    let kurtosis = m4 / (m2 * m2);
    Ok(kurtosis - skew * skew - 1.0)
}

/// For one model, the extent index from which each example stays
/// correctly classified through the end of the schedule. Returns the
/// sentinel `|S_E|` for examples misclassified at the final extent.
pub fn learned_epoch(
    log: &PredictionLog,
    labels: &[u16],
    model_index: usize,
) -> Result<Vec<usize>> {
    check_labels(log, labels)?;
    let num_epochs = log.manifest().num_epochs();
    let m = log.manifest().num_examples;
    let mut learned = vec![0usize; m];
    for e in 0..num_epochs {
        let row = log.model_row(e, model_index)?;
        for (j, (&p, &y)) in row.iter().zip(labels).enumerate() {
            if p != y {
                // a miss at extent e pushes the learned point past it
                learned[j] = e + 1;
            }
        }
    }
    Ok(learned)
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Linear-interpolation quantile of sorted data (numpy's default).
fn quantile_of_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Examples sorted by accessibility (descending) are grouped into
/// `ceil(1 / bin_fraction)` bins; each bin is summarized by the median
/// of the per-example median learned extent across models, with a
/// notched-box confidence interval.
pub fn learned_epoch_boxes(
    log: &PredictionLog,
    labels: &[u16],
    bin_fraction: f64,
) -> Result<Vec<LearnedEpochBin>> {
    if !(bin_fraction > 0.0 && bin_fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "bin_fraction must be in (0, 1], got {bin_fraction}"
        )));
    }
    let access = accessibility(log, labels)?;
    let n = log.manifest().num_models;
    let m = log.manifest().num_examples;

    // per-example median over models of the learned extent index
    let per_model: Vec<Vec<usize>> = (0..n)
        .map(|i| learned_epoch(log, labels, i))
        .collect::<Result<_>>()?;
    let mut per_example = vec![0.0f64; m];
    let mut buf = vec![0.0f64; n];
    for j in 0..m {
        for i in 0..n {
            buf[i] = per_model[i][j] as f64;
        }
        buf.sort_by(|a, b| a.partial_cmp(b).unwrap());
        per_example[j] = median_of_sorted(&buf);
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        access.values[b]
            .partial_cmp(&access.values[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    let n_bins = (1.0 / bin_fraction).ceil() as usize;
    let mut out = Vec::with_capacity(n_bins);
    for b in 0..n_bins {
        let lo = b * m / n_bins;
        let hi = (b + 1) * m / n_bins;
        let mut values: Vec<f64> = order[lo..hi].iter().map(|&j| per_example[j]).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (median, ci_low, ci_high) = if values.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            let median = median_of_sorted(&values);
            let iqr = quantile_of_sorted(&values, 0.75) - quantile_of_sorted(&values, 0.25);
            let half = 1.57 * iqr / (values.len() as f64).sqrt();
            (median, median - half, median + half)
        };
        out.push(LearnedEpochBin {
            bin_index: b,
            count: hi - lo,
            median,
            ci_low,
            ci_high,
        });
    }
    Ok(out)
}

fn histogram_of(scores_per_epoch: Vec<Vec<f64>>, bins: usize) -> Result<HistogramMatrix> {
    if bins < 2 {
        return Err(Error::InvalidConfig(format!(
            "histogram needs at least 2 bins, got {bins}"
        )));
    }
    let mut counts = Vec::with_capacity(scores_per_epoch.len());
    for values in &scores_per_epoch {
        let mut row = vec![0u64; bins];
        for &v in values {
            // equal-width bins on [0, 1]; the last bin is right-closed
            let idx = ((v * bins as f64) as usize).min(bins - 1);
            row[idx] += 1;
        }
        counts.push(row);
    }
    let bin_edges = (0..=bins).map(|i| i as f64 / bins as f64).collect();
    Ok(HistogramMatrix { counts, bin_edges })
}

/// Histogram of TP-agreement per extent: the "condensed" view of the
/// whole learning process.
pub fn condensed(log: &PredictionLog, labels: &[u16], bins: usize) -> Result<HistogramMatrix> {
    let scores = (0..log.manifest().num_epochs())
        .map(|e| tp_agreement(log, labels, e).map(|s| s.values))
        .collect::<Result<Vec<_>>>()?;
    histogram_of(scores, bins)
}

/// Label-free variant of [`condensed`] built from agreement scores.
pub fn condensed_agreement(log: &PredictionLog, bins: usize) -> Result<HistogramMatrix> {
    let scores = (0..log.manifest().num_epochs())
        .map(|e| agreement(log, e).map(|s| s.values))
        .collect::<Result<Vec<_>>>()?;
    histogram_of(scores, bins)
}

/// Per-example plurality label of the collection at one extent; ties
/// break to the lowest class id.
pub fn modal_label(log: &PredictionLog, epoch_index: usize) -> Result<Vec<u16>> {
    let slab = log.epoch_slab(epoch_index)?;
    let n = log.manifest().num_models;
    let m = log.manifest().num_examples;
    let k = log.manifest().num_classes as usize;
    let mut counts = vec![0u32; k];
    let mut touched: Vec<u16> = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        for i in 0..n {
            let p = slab[i * m + j];
            if counts[p as usize] == 0 {
                touched.push(p);
            }
            counts[p as usize] += 1;
        }
        touched.sort_unstable();
        let mut best_class = touched[0];
        let mut best_count = counts[best_class as usize];
        for &t in &touched[1..] {
            if counts[t as usize] > best_count {
                best_class = t;
                best_count = counts[t as usize];
            }
        }
        out.push(best_class);
        for &t in &touched {
            counts[t as usize] = 0;
        }
        touched.clear();
    }
    Ok(out)
}

/// The ensemble prediction: plurality vote over the collection, with
/// the same tie rule as [`modal_label`].
pub fn majority_vote(log: &PredictionLog, epoch_index: usize) -> Result<Vec<u16>> {
    modal_label(log, epoch_index)
}

/// TP-agreement of a single example across every extent.
pub fn trajectory(log: &PredictionLog, labels: &[u16], example_index: usize) -> Result<Vec<f64>> {
    check_labels(log, labels)?;
    let m = log.manifest().num_examples;
    if example_index >= m {
        return Err(Error::IndexOutOfRange {
            what: "example",
            got: example_index,
            limit: m,
        });
    }
    let n = log.manifest().num_models;
    let y = labels[example_index];
    let mut out = Vec::with_capacity(log.manifest().num_epochs());
    for e in 0..log.manifest().num_epochs() {
        let slab = log.epoch_slab(e)?;
        let hits = (0..n)
            .filter(|&i| slab[i * m + example_index] == y)
            .count();
        out.push(hits as f64 / n as f64);
    }
    Ok(out)
}

/// Majority-vote accuracy of the collection at one extent.
pub fn ensemble_accuracy(log: &PredictionLog, labels: &[u16], epoch_index: usize) -> Result<f64> {
    check_labels(log, labels)?;
    let vote = majority_vote(log, epoch_index)?;
    let hits = vote.iter().zip(labels).filter(|(v, y)| v == y).count();
    Ok(hits as f64 / labels.len() as f64)
}
