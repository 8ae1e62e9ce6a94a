//! Plot-ready CSV exporters for the metric types.

use std::io::Write;
use std::path::Path;

use super::{HistogramMatrix, LearnedEpochBin, ScoreVector};
use crate::io_util::atomic_write;
use crate::{Error, Result};

/// `example_index,value` rows.
pub fn export_score_csv(scores: &ScoreVector, path: &Path) -> Result<()> {
    atomic_write(path, |w| {
        writeln!(w, "example_index,value")?;
        for (j, v) in scores.values.iter().enumerate() {
            writeln!(w, "{j},{v}")?;
        }
        Ok(())
    })
}

/// `extent,bin_low,bin_high,count` rows, one per (extent, bin) cell.
/// `extents` labels the rows and must match the histogram's row count.
pub fn export_histogram_csv(
    histogram: &HistogramMatrix,
    extents: &[u64],
    path: &Path,
) -> Result<()> {
    if extents.len() != histogram.counts.len() {
        return Err(Error::LengthMismatch {
            what: "extents",
            expected: histogram.counts.len(),
            got: extents.len(),
        });
    }
    atomic_write(path, |w| {
        writeln!(w, "extent,bin_low,bin_high,count")?;
        for (row, &extent) in histogram.counts.iter().zip(extents) {
            for (b, count) in row.iter().enumerate() {
                writeln!(
                    w,
                    "{extent},{},{},{count}",
                    histogram.bin_edges[b],
                    histogram.bin_edges[b + 1]
                )?;
            }
        }
        Ok(())
    })
}

/// `bin_index,median,ci_low,ci_high` rows.
pub fn export_learned_epoch_boxes_csv(bins: &[LearnedEpochBin], path: &Path) -> Result<()> {
    atomic_write(path, |w| {
        writeln!(w, "bin_index,median,ci_low,ci_high")?;
        for b in bins {
            writeln!(w, "{},{},{},{}", b.bin_index, b.median, b.ci_low, b.ci_high)?;
        }
        Ok(())
    })
}
