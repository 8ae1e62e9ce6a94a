//! Recipe-level tests: output layout, bundle shapes, determinism.

use std::path::Path;

use learnorder::datasets::{export_features_csv, gen_gaussian};
use learnorder::experiments::*;
use learnorder::learners::{Activation, BoostConfig, MlpConfig};

fn tiny_mlp(schedule: &[u64]) -> MlpConfig {
    MlpConfig {
        layer_widths: vec![8],
        activation: Activation::Relu,
        learning_rate: 0.05,
        lr_decay_factor: 1.0,
        decay_every: 0,
        batch_size: 16,
        epoch_schedule: schedule.to_vec(),
        dropout_rate: 0.0,
        seed: 11,
        retrain_per_extent: false,
    }
}

/// Write a small Gaussian train/test pair as feature CSVs and return
/// the matching source description.
fn csv_source(dir: &Path, shift: f64) -> DataSource {
    let (train, test) = gen_gaussian(8, shift, 40, 15, 3).unwrap();
    let train_path = dir.join("train.csv");
    let test_path = dir.join("test.csv");
    export_features_csv(&train, &train_path).unwrap();
    export_features_csv(&test, &test_path).unwrap();
    DataSource::FeaturesCsv {
        train: train_path,
        test: test_path,
        num_classes: 2,
    }
}

fn read_dir_sorted(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

fn metrics_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for name in read_dir_sorted(&dir.join("metrics")) {
        out.push((
            name.clone(),
            std::fs::read(dir.join("metrics").join(name)).unwrap(),
        ));
    }
    out.push((
        "report.json".into(),
        std::fs::read(dir.join("report.json")).unwrap(),
    ));
    out
}

#[test]
fn structured_bundle_layout_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let source = csv_source(dir.path(), 2.0);
    let config = StructuredConfig {
        source,
        train_subset: Some(60),
        mlp: tiny_mlp(&[0, 1, 2]),
        n_models: 3,
        bins: 10,
        bin_fraction: 0.25,
        seed: 7,
    };
    let out_a = dir.path().join("run_a");
    let report = run_structured(&config, &out_a).unwrap();

    assert_eq!(report.train.extents, vec![0, 1, 2]);
    assert_eq!(report.train.ensemble_accuracy.len(), 3);
    assert_eq!(report.test.mean_agreement.len(), 3);

    for f in [
        "manifest.json",
        "report.json",
        "logs/train.plog",
        "logs/train_null.plog",
        "logs/test.plog",
        "logs/test_null.plog",
        "metrics/condensed_tpa_train.csv",
        "metrics/condensed_tpa_train_null.csv",
        "metrics/condensed_agreement_test.csv",
        "metrics/accessibility_train.csv",
        "metrics/learned_epoch_boxes_test.csv",
        "metrics/bimodality_train.csv",
    ] {
        assert!(out_a.join(f).exists(), "{f} missing");
    }

    // a condensed histogram holds |S_E| * bins rows plus the header
    let text = std::fs::read_to_string(out_a.join("metrics/condensed_tpa_train.csv")).unwrap();
    assert_eq!(text.lines().count(), 3 * 10 + 1);

    // reruns are byte-identical
    let out_b = dir.path().join("run_b");
    run_structured(&config, &out_b).unwrap();
    assert_eq!(metrics_bytes(&out_a), metrics_bytes(&out_b));
}

#[test]
fn gaussian_recipe_reports_half_ensemble_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let config = GaussianRunConfig {
        dim: 8,
        mean_shift: 0.5,
        n_train_per_class: 30,
        n_test_per_class: 20,
        mlp: tiny_mlp(&[1, 2]),
        n_models: 4,
        bins: 10,
        bin_fraction: 0.5,
        seed: 13,
    };
    let report = run_gaussian(&config, &dir.path().join("out")).unwrap();
    assert!(report.half_ensemble_test_r.is_some());
    assert_eq!(report.train.extents, vec![1, 2]);
}

#[test]
fn random_labels_recipe_shuffles_both_splits() {
    let dir = tempfile::tempdir().unwrap();
    let source = csv_source(dir.path(), 5.0);
    let config = RandomLabelsConfig {
        source,
        train_subset: None,
        mlp: tiny_mlp(&[1]),
        n_models: 2,
        bins: 10,
        bin_fraction: 0.5,
        seed: 17,
    };
    let report = run_random_labels(&config, &dir.path().join("out")).unwrap();
    // labels are random draws over 2 classes: even a shift-5 blob pair
    // cannot be classified far above chance on the test split
    let final_test = *report.test.ensemble_accuracy.last().unwrap();
    assert!(
        (0.2..=0.8).contains(&final_test),
        "test accuracy {final_test} not chance-like"
    );
}

#[test]
fn partitions_recipe_reports_pairwise_correlations() {
    let dir = tempfile::tempdir().unwrap();
    let source = csv_source(dir.path(), 2.0);
    let config = PartitionsConfig {
        source,
        train_subset: None,
        parts: 2,
        mlp: tiny_mlp(&[1, 2]),
        n_models: 2,
        bins: 10,
        seed: 19,
    };
    let out = dir.path().join("out");
    let report = run_partitions(&config, &out).unwrap();
    assert_eq!(report.partition_sizes, vec![40, 40]);
    assert_eq!(report.pairwise_test_r.len(), 1);
    assert!(out.join("logs/partition0_test.plog").exists());
    assert!(out.join("logs/partition1_train.plog").exists());
    assert!(out.join("metrics/partition_correlations.csv").exists());
}

#[test]
fn partitions_with_one_part_degenerates_gracefully() {
    let dir = tempfile::tempdir().unwrap();
    let source = csv_source(dir.path(), 2.0);
    let config = PartitionsConfig {
        source,
        train_subset: None,
        parts: 1,
        mlp: tiny_mlp(&[1]),
        n_models: 2,
        bins: 10,
        seed: 31,
    };
    let report = run_partitions(&config, &dir.path().join("out")).unwrap();
    assert_eq!(report.partition_sizes, vec![80]);
    assert!(report.pairwise_test_r.is_empty());
    assert_eq!(report.test_accuracy_final.len(), 1);
}

#[test]
fn paradigms_recipe_produces_both_correlations() {
    let dir = tempfile::tempdir().unwrap();
    let source = csv_source(dir.path(), 3.0);
    let config = ParadigmsConfig {
        source,
        train_subset: None,
        mlp: tiny_mlp(&[1, 3]),
        n_models: 2,
        boost: BoostConfig {
            num_weak: 5,
            weak_epochs: 2,
            weak_lr: 0.1,
            weak_batch_size: 20,
            snapshot_schedule: vec![1, 3, 5],
            seed: 23,
        },
        bins: 5,
        tolerance: 0.05,
        seed: 23,
    };
    let out = dir.path().join("out");
    let report = run_paradigms(&config, &out).unwrap();
    assert!(report.r_nn_nn_train.r.is_finite());
    assert!(report.r_nn_boost_train.r.is_finite());
    assert!(!report.boost_rounds.is_empty());
    assert!(out.join("logs/adaboost_train.plog").exists());
    assert!(out.join("metrics/binned_boost_vs_nn_train.csv").exists());
    assert!(out
        .join("metrics/nn_vs_boost_test_pairs_overlap.csv")
        .exists());
}

#[test]
fn out_of_sample_agreement_is_at_least_chance() {
    let dir = tempfile::tempdir().unwrap();
    let source = csv_source(dir.path(), 2.0);
    let config = OutOfSampleConfig {
        source,
        train_subset: None,
        mlp: tiny_mlp(&[1, 2]),
        n_models: 4,
        noise_count: 50,
        bins: 10,
        seed: 29,
    };
    let out = dir.path().join("out");
    let report = run_out_of_sample(&config, &out).unwrap();
    let chance = 0.5; // K = 2
    for series in [
        &report.mean_agreement_test,
        &report.mean_agreement_noise,
        &report.mean_agreement_null,
    ] {
        assert_eq!(series.len(), 2);
        for &v in series.iter() {
            assert!(v >= chance - 1e-12, "mean agreement {v} below 1/K");
        }
    }
    assert!(out.join("logs/noise.plog").exists());
    assert!(out.join("metrics/mean_agreement.csv").exists());
}
