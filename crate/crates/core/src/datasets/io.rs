//! Dataset ingestion: IDX image/label pairs and the feature CSV format.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use ndarray::Array2;

use super::{LabeledDataset, Split};
use crate::io_util::atomic_write;
use crate::{Error, Result};

const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
const IDX_LABEL_MAGIC: u32 = 0x0000_0801;

fn read_u32_be(reader: &mut impl Read, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    reader
        .read_exact(&mut buf)
        .map_err(|_| Error::Format(format!("truncated IDX file while reading {what}")))?;
    Ok(u32::from_be_bytes(buf))
}

/// Load an IDX image/label file pair (the MNIST container format).
/// Pixel bytes are scaled to [0, 1] by dividing by 255; the feature
/// dimension is rows * cols. The class count is inferred as
/// max label + 1.
pub fn load_idx(images_path: &Path, labels_path: &Path, split: Split) -> Result<LabeledDataset> {
    let mut images = BufReader::new(File::open(images_path)?);
    let magic = read_u32_be(&mut images, "image magic")?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(Error::Format(format!(
            "bad IDX image magic {magic:#010x}, expected {IDX_IMAGE_MAGIC:#010x}"
        )));
    }
    let count = read_u32_be(&mut images, "image count")? as usize;
    let rows = read_u32_be(&mut images, "image rows")? as usize;
    let cols = read_u32_be(&mut images, "image cols")? as usize;
    let dim = rows * cols;
    if count == 0 || dim == 0 {
        return Err(Error::Format("empty IDX image file".into()));
    }
    let mut pixels = vec![0u8; count * dim];
    images
        .read_exact(&mut pixels)
        .map_err(|_| Error::Format("truncated IDX image data".into()))?;

    let mut labels_file = BufReader::new(File::open(labels_path)?);
    let magic = read_u32_be(&mut labels_file, "label magic")?;
    if magic != IDX_LABEL_MAGIC {
        return Err(Error::Format(format!(
            "bad IDX label magic {magic:#010x}, expected {IDX_LABEL_MAGIC:#010x}"
        )));
    }
    let label_count = read_u32_be(&mut labels_file, "label count")? as usize;
    if label_count != count {
        return Err(Error::Format(format!(
            "IDX count mismatch: {count} images but {label_count} labels"
        )));
    }
    let mut raw_labels = vec![0u8; count];
    labels_file
        .read_exact(&mut raw_labels)
        .map_err(|_| Error::Format("truncated IDX label data".into()))?;

    let features = Array2::from_shape_fn((count, dim), |(r, c)| pixels[r * dim + c] as f64 / 255.0);
    let labels: Vec<u16> = raw_labels.iter().map(|&l| l as u16).collect();
    let num_classes = labels.iter().copied().max().unwrap_or(0) + 1;
    LabeledDataset::new(
        features,
        labels,
        num_classes.max(2),
        split,
        format!("idx({})", images_path.display()),
    )
}

/// Load the feature CSV format: header `label,f0,f1,...`, one example
/// per row. The feature dimension is inferred from the header.
pub fn load_features_csv(path: &Path, num_classes: u16, split: Split) -> Result<LabeledDataset> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty feature CSV".into()))??;
    let mut cols = header.trim().split(',');
    if cols.next() != Some("label") {
        return Err(Error::Format(format!(
            "feature CSV header must start with 'label', got: {header}"
        )));
    }
    let dim = cols.count();
    if dim == 0 {
        return Err(Error::Format("feature CSV has no feature columns".into()));
    }

    let mut labels = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (line_no, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let label: u16 = fields
            .next()
            .unwrap()
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("line {}: bad label", line_no + 2)))?;
        if label >= num_classes {
            return Err(Error::LabelOutOfRange {
                label: label as u32,
                num_classes,
            });
        }
        let mut row_dim = 0usize;
        for field in fields {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad feature value", line_no + 2)))?;
            if !v.is_finite() {
                return Err(Error::NonFinite(format!(
                    "feature on line {}",
                    line_no + 2
                )));
            }
            values.push(v);
            row_dim += 1;
        }
        if row_dim != dim {
            return Err(Error::Format(format!(
                "line {}: expected {dim} features, got {row_dim}",
                line_no + 2
            )));
        }
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::Format("feature CSV has no data rows".into()));
    }
    let features = Array2::from_shape_vec((labels.len(), dim), values)
        .expect("row-major feature buffer matches shape");
    LabeledDataset::new(
        features,
        labels,
        num_classes,
        split,
        format!("csv({})", path.display()),
    )
}

/// Write a dataset in the feature CSV format read by
/// [`load_features_csv`].
pub fn export_features_csv(dataset: &LabeledDataset, path: &Path) -> Result<()> {
    atomic_write(path, |w| {
        write!(w, "label")?;
        for c in 0..dataset.dim() {
            write!(w, ",f{c}")?;
        }
        writeln!(w)?;
        for (row, &label) in dataset.labels.iter().enumerate() {
            write!(w, "{label}")?;
            for v in dataset.features.row(row) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_idx_pair(dir: &Path, pixels: &[u8], labels: &[u8], rows: u32, cols: u32) -> (std::path::PathBuf, std::path::PathBuf) {
        let images_path = dir.join("images.idx");
        let labels_path = dir.join("labels.idx");
        let count = labels.len() as u32;
        let mut img = Vec::new();
        img.extend_from_slice(&IDX_IMAGE_MAGIC.to_be_bytes());
        img.extend_from_slice(&count.to_be_bytes());
        img.extend_from_slice(&rows.to_be_bytes());
        img.extend_from_slice(&cols.to_be_bytes());
        img.extend_from_slice(pixels);
        std::fs::write(&images_path, img).unwrap();
        let mut lab = Vec::new();
        lab.extend_from_slice(&IDX_LABEL_MAGIC.to_be_bytes());
        lab.extend_from_slice(&count.to_be_bytes());
        lab.extend_from_slice(labels);
        std::fs::write(&labels_path, lab).unwrap();
        (images_path, labels_path)
    }

    #[test]
    fn idx_hand_built_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let pixels = [0u8, 51, 102, 153, 204, 255, 10, 20];
        let (images, labels) = write_idx_pair(dir.path(), &pixels, &[1, 0], 2, 2);
        let ds = load_idx(&images, &labels, Split::Train).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 4);
        assert_eq!(ds.labels, vec![1, 0]);
        let expect = [0.0, 51.0 / 255.0, 102.0 / 255.0, 153.0 / 255.0];
        for (c, &e) in expect.iter().enumerate() {
            assert_eq!(ds.features[[0, c]], e);
        }
        assert_eq!(ds.features[[1, 1]], 1.0);
    }

    #[test]
    fn idx_rejects_bad_magic_and_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = write_idx_pair(dir.path(), &[0; 8], &[0, 1], 2, 2);

        // corrupt image magic
        let mut bytes = std::fs::read(&images).unwrap();
        bytes[3] = 0x04;
        let bad = dir.path().join("bad.idx");
        std::fs::write(&bad, &bytes).unwrap();
        assert!(matches!(
            load_idx(&bad, &labels, Split::Train),
            Err(Error::Format(_))
        ));

        // label count mismatch
        let (_, labels3) = {
            let labels_path = dir.path().join("labels3.idx");
            let mut lab = Vec::new();
            lab.extend_from_slice(&IDX_LABEL_MAGIC.to_be_bytes());
            lab.extend_from_slice(&3u32.to_be_bytes());
            lab.extend_from_slice(&[0, 1, 0]);
            std::fs::write(&labels_path, lab).unwrap();
            (0, labels_path)
        };
        assert!(matches!(
            load_idx(&images, &labels3, Split::Train),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn feature_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        std::fs::write(&path, "label,f0,f1\n0,0.5,-1\n1,2.25,3\n2,0.125,-0.75\n").unwrap();
        let ds = load_features_csv(&path, 3, Split::Train).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.features[[1, 0]], 2.25);

        let out = dir.path().join("out.csv");
        export_features_csv(&ds, &out).unwrap();
        let back = load_features_csv(&out, 3, Split::Train).unwrap();
        assert_eq!(back.features, ds.features);
        assert_eq!(back.labels, ds.labels);
    }

    #[test]
    fn feature_csv_rejects_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");

        std::fs::write(&path, "label,f0,f1\n3,0,0\n").unwrap();
        assert!(matches!(
            load_features_csv(&path, 3, Split::Train),
            Err(Error::LabelOutOfRange { label: 3, .. })
        ));

        std::fs::write(&path, "label,f0,f1\n0,1\n").unwrap();
        assert!(matches!(
            load_features_csv(&path, 3, Split::Train),
            Err(Error::Format(_))
        ));

        std::fs::write(&path, "label,f0,f1\n0,1,NaN\n").unwrap();
        assert!(matches!(
            load_features_csv(&path, 3, Split::Train),
            Err(Error::NonFinite(_))
        ));
    }
}
