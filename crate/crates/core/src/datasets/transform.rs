//! Label shuffling, partitioning, and per-feature normalization.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LabeledDataset;
use crate::{Error, Result};

/// Replace every label with an independent uniform draw over the
/// dataset's classes. Features are untouched; only the given split is
/// affected.
pub fn shuffle_labels(dataset: &LabeledDataset, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = dataset
        .labels
        .iter()
        .map(|_| rng.gen_range(0..dataset.num_classes))
        .collect();
    LabeledDataset {
        features: dataset.features.clone(),
        labels,
        num_classes: dataset.num_classes,
        split: dataset.split,
        provenance: format!("{}+shuffled_labels(seed={seed})", dataset.provenance),
    }
}

/// Randomly permute the examples and split them into `parts` disjoint
/// datasets covering the input exactly. When sizes do not divide
/// evenly, the remainder is spread over the first partitions.
pub fn partition(dataset: &LabeledDataset, parts: usize, seed: u64) -> Result<Vec<LabeledDataset>> {
    let m = dataset.len();
    if parts == 0 || parts > m {
        return Err(Error::InvalidConfig(format!(
            "cannot split {m} examples into {parts} partitions"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let base = m / parts;
    let remainder = m % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0usize;
    for p in 0..parts {
        let size = base + usize::from(p < remainder);
        let idx = &order[start..start + size];
        start += size;
        out.push(dataset.select(
            idx,
            format!(
                "{}+partition({p}/{parts},seed={seed})",
                dataset.provenance
            ),
        )?);
    }
    Ok(out)
}

/// Normalize every feature column to zero mean and unit standard
/// deviation, with the statistics computed on `train` only and applied
/// to `train` and every dataset in `others`. Zero-variance columns are
/// mapped to all zeros.
pub fn normalize_per_feature(
    train: &mut LabeledDataset,
    others: &mut [&mut LabeledDataset],
) -> Result<()> {
    let d = train.dim();
    for other in others.iter() {
        if other.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "normalize: train has {d} features, {} has {}",
                other.provenance,
                other.dim()
            )));
        }
    }
    let m = train.len() as f64;
    let mut means = vec![0.0f64; d];
    let mut stds = vec![0.0f64; d];
    for col in 0..d {
        let c = train.features.column(col);
        let mean = c.sum() / m;
        let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
        means[col] = mean;
        stds[col] = var.sqrt();
    }
    let apply = |ds: &mut LabeledDataset| {
        for mut row in ds.features.rows_mut() {
            for col in 0..d {
                row[col] = if stds[col] > 0.0 {
                    (row[col] - means[col]) / stds[col]
                } else {
                    0.0
                };
            }
        }
        ds.provenance = format!("{}+normalized", ds.provenance);
    };
    apply(train);
    for other in others.iter_mut() {
        apply(other);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{gen_gaussian, gen_noise, Split};
    use ndarray::Array2;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn toy(m: usize, k: u16) -> LabeledDataset {
        let features = Array2::from_shape_fn((m, 3), |(r, c)| (r * 3 + c) as f64);
        let labels = (0..m).map(|i| (i % k as usize) as u16).collect();
        LabeledDataset::new(features, labels, k, Split::Train, "toy".into()).unwrap()
    }

    #[test]
    fn shuffle_is_uniform_and_deterministic() {
        let mut ds = toy(100_000, 2);
        ds.labels = vec![0; ds.len()];
        let a = shuffle_labels(&ds, 5);
        let b = shuffle_labels(&ds, 5);
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.features, ds.features);

        let unchanged = a.labels.iter().filter(|&&l| l == 0).count() as f64 / a.len() as f64;
        assert!((unchanged - 0.5).abs() < 0.01, "unchanged {unchanged}");
    }

    #[test]
    fn shuffle_per_class_counts_concentrate() {
        let ds = toy(40_000, 8);
        let shuffled = shuffle_labels(&ds, 11);
        let m = ds.len() as f64;
        let bound = 4.0 * m.sqrt();
        for class in 0..8u16 {
            let count = shuffled.labels.iter().filter(|&&l| l == class).count() as f64;
            assert!(
                (count - m / 8.0).abs() < bound,
                "class {class}: count {count}"
            );
        }
    }

    #[test]
    fn partition_one_is_permuted_copy() {
        let ds = toy(10, 2);
        let parts = partition(&ds, 1, 3).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].len(), 10);
        let mut rows: Vec<Vec<u64>> = (0..10)
            .map(|r| parts[0].features.row(r).iter().map(|v| v.to_bits()).collect())
            .collect();
        let mut orig: Vec<Vec<u64>> = (0..10)
            .map(|r| ds.features.row(r).iter().map(|v| v.to_bits()).collect())
            .collect();
        rows.sort();
        orig.sort();
        assert_eq!(rows, orig);
    }

    #[test]
    fn partition_two_covers_disjointly() {
        let ds = toy(10, 2);
        let parts = partition(&ds, 2, 9).unwrap();
        assert_eq!(parts[0].len(), 5);
        assert_eq!(parts[1].len(), 5);
        let ids = |p: &LabeledDataset| -> HashSet<u64> {
            (0..p.len()).map(|r| p.features[[r, 0]].to_bits()).collect()
        };
        let a = ids(&parts[0]);
        let b = ids(&parts[1]);
        assert!(a.is_disjoint(&b));
        let union: HashSet<u64> = a.union(&b).copied().collect();
        assert_eq!(union.len(), 10);
    }

    #[test]
    fn partition_sixty_thousand_into_sixty() {
        let features = Array2::zeros((60_000, 1));
        let ds =
            LabeledDataset::new(features, vec![0; 60_000], 2, Split::Train, "big".into()).unwrap();
        let parts = partition(&ds, 60, 1).unwrap();
        assert_eq!(parts.len(), 60);
        assert!(parts.iter().all(|p| p.len() == 1000));
    }

    #[test]
    fn partition_rejects_too_many_parts() {
        let ds = toy(4, 2);
        assert!(partition(&ds, 5, 0).is_err());
        assert!(partition(&ds, 0, 0).is_err());
    }

    #[test]
    fn normalize_train_statistics() {
        let (mut train, mut test) = gen_gaussian(16, 0.3, 200, 50, 21).unwrap();
        normalize_per_feature(&mut train, &mut [&mut test]).unwrap();
        let m = train.len() as f64;
        for col in 0..train.dim() {
            let c = train.features.column(col);
            let mean = c.sum() / m;
            let std = (c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m).sqrt();
            assert!(mean.abs() < 1e-6, "col {col} mean {mean}");
            assert!((std - 1.0).abs() < 1e-6, "col {col} std {std}");
        }
    }

    #[test]
    fn normalize_constant_column_maps_to_zero() {
        let mut features = Array2::zeros((5, 2));
        for r in 0..5 {
            features[[r, 0]] = 3.5; // constant
            features[[r, 1]] = r as f64;
        }
        let mut ds =
            LabeledDataset::new(features, vec![0; 5], 2, Split::Train, "const".into()).unwrap();
        normalize_per_feature(&mut ds, &mut []).unwrap();
        assert!(ds.features.column(0).iter().all(|&v| v == 0.0));
        assert!(ds.features.column(1).iter().any(|&v| v != 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn partition_disjoint_cover(m in 1usize..120, parts in 1usize..12, seed in 0u64..50) {
            prop_assume!(parts <= m);
            let ds = gen_noise(m, 1, 1234).unwrap();
            let out = partition(&ds, parts, seed).unwrap();
            prop_assert_eq!(out.len(), parts);
            let total: usize = out.iter().map(|p| p.len()).sum();
            prop_assert_eq!(total, m);
            let mut seen: Vec<u64> = out
                .iter()
                .flat_map(|p| (0..p.len()).map(|r| p.features[[r, 0]].to_bits()))
                .collect();
            seen.sort_unstable();
            let mut orig: Vec<u64> = (0..m).map(|r| ds.features[[r, 0]].to_bits()).collect();
            orig.sort_unstable();
            prop_assert_eq!(seen, orig);
        }
    }
}
