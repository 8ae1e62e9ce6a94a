//! Cross-collection analyses: accuracy-matched extent pairing, overlap
//! counts of majority-vote-correct sets, accessibility correlation, and
//! binned paradigm comparison.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::io_util::atomic_write;
use crate::metrics;
use crate::predlog::PredictionLog;
use crate::{Error, Result};

/// Two extents whose ensembles reach matching accuracy. `accuracy` is
/// the matching-axis value: the weaker side's accuracy for
/// within-tolerance pairs, the stronger side's for surplus pairs
/// against the weaker collection's converged state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedPair {
    pub extent_a_index: usize,
    pub extent_a: u64,
    pub extent_b_index: usize,
    pub extent_b: u64,
    pub accuracy: f64,
}

/// Result of accuracy matching: pairs plus any extents of `log_b` that
/// found no partner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochMatch {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_b: Vec<usize>,
}

/// How the majority-vote-correct sets of two ensembles overlap at one
/// matched pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OverlapCount {
    pub both: usize,
    pub only_a: usize,
    pub only_b: usize,
}

/// Pearson correlation with its two-sided p-value reported as log10.
/// `log10_p` is `-inf` when the correlation is exactly +-1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub r: f64,
    pub log10_p: f64,
}

/// One bin of [`binned_comparison`]: x-values falling into the bin,
/// summarized by the mean and standard error of their y-values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedPoint {
    pub bin_center: f64,
    pub mean: Option<f64>,
    pub stderr: f64,
    pub count: usize,
}

/// Pair the extents of two collections by majority-vote ensemble
/// accuracy on a shared eval set. Pass the weaker (or slower)
/// collection as `log_b`: each of its extents is paired with the
/// closest `log_a` extent within `tolerance` (ties to the earlier
/// extent), and every `log_a` extent whose accuracy exceeds `log_b`'s
/// maximum is paired with `log_b`'s final extent.
pub fn match_epochs(
    log_a: &PredictionLog,
    log_b: &PredictionLog,
    labels: &[u16],
    tolerance: f64,
) -> Result<EpochMatch> {
    if log_a.manifest().num_examples != log_b.manifest().num_examples {
        return Err(Error::LengthMismatch {
            what: "eval set",
            expected: log_a.manifest().num_examples,
            got: log_b.manifest().num_examples,
        });
    }
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(Error::InvalidConfig(format!("bad tolerance {tolerance}")));
    }
    let acc = |log: &PredictionLog| -> Result<Vec<f64>> {
        (0..log.manifest().num_epochs())
            .map(|e| metrics::ensemble_accuracy(log, labels, e))
            .collect()
    };
    let acc_a = acc(log_a)?;
    let acc_b = acc(log_b)?;
    let max_b = acc_b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let schedule_a = &log_a.manifest().epoch_schedule;
    let schedule_b = &log_b.manifest().epoch_schedule;

    let mut pairs = Vec::new();
    let mut paired_a = vec![false; acc_a.len()];
    let mut unmatched_b = Vec::new();
    for (b, &ab) in acc_b.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (a, &aa) in acc_a.iter().enumerate() {
            let diff = (aa - ab).abs();
            if best.is_none_or(|(_, d)| diff < d) {
                best = Some((a, diff));
            }
        }
        match best {
            Some((a, diff)) if diff <= tolerance => {
                paired_a[a] = true;
                pairs.push(MatchedPair {
                    extent_a_index: a,
                    extent_a: schedule_a[a],
                    extent_b_index: b,
                    extent_b: schedule_b[b],
                    accuracy: ab,
                });
            }
            _ => unmatched_b.push(b),
        }
    }
    // surplus extents of the stronger collection line up against the
    // weaker collection's converged state
    let last_b = acc_b.len() - 1;
    for (a, &aa) in acc_a.iter().enumerate() {
        if aa > max_b && !paired_a[a] {
            pairs.push(MatchedPair {
                extent_a_index: a,
                extent_a: schedule_a[a],
                extent_b_index: last_b,
                extent_b: schedule_b[last_b],
                accuracy: aa,
            });
        }
    }
    unmatched_b.retain(|&b| !pairs.iter().any(|p| p.extent_b_index == b));
    Ok(EpochMatch { pairs, unmatched_b })
}

/// Per-pair counts of examples classified correctly by both ensembles
/// or by exactly one, using the majority vote of each collection.
pub fn overlap_counts(
    log_a: &PredictionLog,
    log_b: &PredictionLog,
    labels: &[u16],
    pairs: &[MatchedPair],
) -> Result<Vec<OverlapCount>> {
    let mut out = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let vote_a = metrics::majority_vote(log_a, pair.extent_a_index)?;
        let vote_b = metrics::majority_vote(log_b, pair.extent_b_index)?;
        if vote_a.len() != labels.len() || vote_b.len() != labels.len() {
            return Err(Error::LengthMismatch {
                what: "labels",
                expected: vote_a.len(),
                got: labels.len(),
            });
        }
        let mut count = OverlapCount {
            both: 0,
            only_a: 0,
            only_b: 0,
        };
        for ((a, b), y) in vote_a.iter().zip(&vote_b).zip(labels) {
            match (a == y, b == y) {
                (true, true) => count.both += 1,
                (true, false) => count.only_a += 1,
                (false, true) => count.only_b += 1,
                (false, false) => {}
            }
        }
        out.push(count);
    }
    Ok(out)
}

/// Sample Pearson correlation with a two-sided p-value from the t
/// statistic `r * sqrt((n - 2) / (1 - r^2))`. The p-value is computed
/// in the log domain past |t| = 38 (a normal-tail expansion), so the
/// extreme correlations this toolkit meets do not underflow.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            what: "pearson inputs",
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Degenerate("pearson needs at least 3 points"));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("constant input"));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = nf - 2.0;
    let denom = 1.0 - r * r;
    let log10_p = if denom <= 0.0 {
        f64::NEG_INFINITY
    } else {
        let t = r.abs() * (df / denom).sqrt();
        log10_two_sided_p(t, df)
    };
    Ok(Correlation { r, log10_p })
}

/// log10 of `2 * P(T_df > t)` for `t >= 0`.
fn log10_two_sided_p(t: f64, df: f64) -> f64 {
    const NORMAL_TAIL_CUTOFF: f64 = 38.0;
    if t <= NORMAL_TAIL_CUTOFF {
        let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
        let p = 2.0 * dist.cdf(-t);
        if p > 0.0 {
            return p.log10();
        }
        // fell through: underflowed despite moderate t (huge df)
    }
    // ln(2 * Phi(-t)) via the Mills-ratio expansion of the normal tail
    let ln2 = std::f64::consts::LN_2;
    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    let series = (1.0 - 1.0 / (t * t) + 3.0 / (t * t * t * t)).ln();
    (ln2 - half_ln_2pi - 0.5 * t * t - t.ln() + series) / std::f64::consts::LN_10
}

/// Correlate the accessibility scores of two collections over the same
/// example set.
pub fn correlate_accessibility(
    log_a: &PredictionLog,
    labels_a: &[u16],
    log_b: &PredictionLog,
    labels_b: &[u16],
) -> Result<Correlation> {
    if log_a.manifest().num_examples != log_b.manifest().num_examples {
        return Err(Error::LengthMismatch {
            what: "example set",
            expected: log_a.manifest().num_examples,
            got: log_b.manifest().num_examples,
        });
    }
    let a = metrics::accessibility(log_a, labels_a)?;
    let b = metrics::accessibility(log_b, labels_b)?;
    pearson(&a.values, &b.values)
}

/// Bin `x` into `n_bins` equal-width bins over [min(x), max(x)] and
/// summarize the y-values of each bin by mean and standard error
/// (sample std / sqrt(count); 0 for single-element bins by convention).
/// Empty bins are emitted with count 0 and no mean.
pub fn binned_comparison(x: &[f64], y: &[f64], n_bins: usize) -> Result<Vec<BinnedPoint>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            what: "binned inputs",
            expected: x.len(),
            got: y.len(),
        });
    }
    if n_bins < 2 {
        return Err(Error::InvalidConfig("n_bins must be >= 2".into()));
    }
    if x.is_empty() {
        return Err(Error::Degenerate("empty input"));
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::NonFinite("binned_comparison x".into()));
    }
    if lo == hi {
        return Err(Error::Degenerate("degenerate x range"));
    }
    let width = (hi - lo) / n_bins as f64;
    let mut members: Vec<Vec<f64>> = vec![Vec::new(); n_bins];
    for (&xv, &yv) in x.iter().zip(y) {
        let idx = (((xv - lo) / width) as usize).min(n_bins - 1);
        members[idx].push(yv);
    }
    Ok(members
        .into_iter()
        .enumerate()
        .map(|(b, ys)| {
            let count = ys.len();
            let bin_center = lo + width * (b as f64 + 0.5);
            if count == 0 {
                return BinnedPoint {
                    bin_center,
                    mean: None,
                    stderr: 0.0,
                    count,
                };
            }
            let mean = ys.iter().sum::<f64>() / count as f64;
            let stderr = if count == 1 {
                0.0
            } else {
                let var =
                    ys.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count as f64 - 1.0);
                (var / count as f64).sqrt()
            };
            BinnedPoint {
                bin_center,
                mean: Some(mean),
                stderr,
                count,
            }
        })
        .collect())
}

/// A full two-collection comparison: matched extents with overlap
/// counts, the accessibility correlation, and an accessibility-binned
/// summary of collection A against collection B.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub matched_pairs: Vec<MatchedPair>,
    pub unmatched_b: Vec<usize>,
    pub overlap: Vec<OverlapCount>,
    pub pearson_r: f64,
    /// `-inf` serializes as JSON null.
    pub log10_p: f64,
    pub binned: Vec<BinnedPoint>,
}

/// Build a [`ComparisonReport`] for two collections evaluated on the
/// same labeled set: extents are matched at `tolerance`, overlaps are
/// counted per pair, accessibilities are correlated, and B's
/// accessibility is binned into `n_bins` bins of A's.
pub fn comparison_report(
    log_a: &PredictionLog,
    log_b: &PredictionLog,
    labels: &[u16],
    tolerance: f64,
    n_bins: usize,
) -> Result<ComparisonReport> {
    let matched = match_epochs(log_a, log_b, labels, tolerance)?;
    let overlap = overlap_counts(log_a, log_b, labels, &matched.pairs)?;
    let access_a = metrics::accessibility(log_a, labels)?;
    let access_b = metrics::accessibility(log_b, labels)?;
    let corr = pearson(&access_a.values, &access_b.values)?;
    let binned = binned_comparison(&access_a.values, &access_b.values, n_bins)?;
    Ok(ComparisonReport {
        matched_pairs: matched.pairs,
        unmatched_b: matched.unmatched_b,
        overlap,
        pearson_r: corr.r,
        log10_p: corr.log10_p,
        binned,
    })
}

impl ComparisonReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        atomic_write(path, |w| {
            serde_json::to_writer_pretty(&mut *w, self)?;
            writeln!(w)?;
            Ok(())
        })
    }

    /// `pairs_overlap.csv`: one row per matched pair.
    pub fn write_pairs_overlap_csv(&self, path: &Path) -> Result<()> {
        atomic_write(path, |w| {
            writeln!(
                w,
                "extent_a_index,extent_a,extent_b_index,extent_b,accuracy,both,only_a,only_b"
            )?;
            for (pair, ov) in self.matched_pairs.iter().zip(&self.overlap) {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    pair.extent_a_index,
                    pair.extent_a,
                    pair.extent_b_index,
                    pair.extent_b,
                    pair.accuracy,
                    ov.both,
                    ov.only_a,
                    ov.only_b
                )?;
            }
            Ok(())
        })
    }

    /// `correlation.csv`: a single accessibility-correlation row.
    pub fn write_correlation_csv(&self, path: &Path) -> Result<()> {
        atomic_write(path, |w| {
            writeln!(w, "name,r,log10_p")?;
            writeln!(w, "accessibility,{},{}", self.pearson_r, self.log10_p)?;
            Ok(())
        })
    }

    /// `bins.csv`: empty bins keep an empty mean field.
    pub fn write_binned_csv(&self, path: &Path) -> Result<()> {
        write_binned_csv(&self.binned, path)
    }
}

/// `bin_center,mean,stderr,count` rows; empty bins keep an empty mean.
pub fn write_binned_csv(bins: &[BinnedPoint], path: &Path) -> Result<()> {
    atomic_write(path, |w| {
        writeln!(w, "bin_center,mean,stderr,count")?;
        for b in bins {
            match b.mean {
                Some(mean) => writeln!(w, "{},{},{},{}", b.bin_center, mean, b.stderr, b.count)?,
                None => writeln!(w, "{},,{},{}", b.bin_center, b.stderr, b.count)?,
            }
        }
        Ok(())
    })
}
