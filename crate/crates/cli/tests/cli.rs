//! End-to-end checks of the command-line surface.

use std::path::Path;
use std::process::{Command, Output};

fn learnorder(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_learnorder"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn gen_gaussian_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "gen",
        "gaussian",
        "--dim",
        "8",
        "--n-train-per-class",
        "6",
        "--n-test-per-class",
        "3",
        "--seed",
        "7",
    ];
    let mut a = args.to_vec();
    a.extend(["--out", "d1"]);
    assert_ok(&learnorder(&a, dir.path()));
    let mut b = args.to_vec();
    b.extend(["--out", "d2"]);
    assert_ok(&learnorder(&b, dir.path()));
    for f in ["train.csv", "test.csv"] {
        let x = std::fs::read(dir.path().join("d1").join(f)).unwrap();
        let y = std::fs::read(dir.path().join("d2").join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between identical runs");
    }
}

#[test]
fn analyze_on_unfilled_log_exits_one_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cells.csv"),
        "epoch_index,model_index,example_index,predicted_label\n0,0,0,1\n",
    )
    .unwrap();
    let manifest = serde_json::json!({
        "dataset_id": "t",
        "split": "train",
        "num_classes": 5,
        "num_examples": 2,
        "num_models": 1,
        "epoch_schedule": [1],
        "learner_tag": "t",
        "seed": 0
    });
    std::fs::write(
        dir.path().join("manifest.json"),
        serde_json::to_string(&manifest).unwrap(),
    )
    .unwrap();
    std::fs::write(dir.path().join("data.csv"), "label,f0\n0,0\n1,0\n").unwrap();

    let out = learnorder(
        &[
            "analyze",
            "tpa",
            "--log-csv",
            "cells.csv",
            "--log-manifest",
            "manifest.json",
            "--data",
            "data.csv",
            "--epoch-index",
            "0",
            "--out",
            "tpa.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("unfilled epoch"),
        "diagnostic missing: {stderr}"
    );
    assert!(!dir.path().join("tpa.csv").exists(), "no partial output");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = learnorder(&["analyze", "tpa", "--bogus-flag"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_analyze_null_compare_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&learnorder(
        &[
            "gen", "gaussian", "--dim", "8", "--n-train-per-class", "20",
            "--n-test-per-class", "10", "--seed", "3", "--out", "data",
        ],
        dir.path(),
    ));
    let mlp = serde_json::json!({
        "layer_widths": [8],
        "activation": "relu",
        "learning_rate": 0.05,
        "batch_size": 10,
        "epoch_schedule": [1, 2],
        "seed": 5
    });
    std::fs::write(dir.path().join("mlp.json"), mlp.to_string()).unwrap();
    assert_ok(&learnorder(
        &[
            "train", "mlp", "--train", "data/train.csv", "--num-classes", "2",
            "--eval", "data/test.csv", "--config", "mlp.json", "--n-models", "3",
            "--out", "logs",
        ],
        dir.path(),
    ));
    assert!(dir.path().join("logs/train.plog").exists());
    assert!(dir.path().join("logs/eval0_test.plog").exists());

    assert_ok(&learnorder(
        &[
            "analyze", "accessibility", "--log", "logs/train.plog",
            "--data", "data/train.csv", "--out", "access.csv",
        ],
        dir.path(),
    ));
    let access = std::fs::read_to_string(dir.path().join("access.csv")).unwrap();
    assert_eq!(access.lines().count(), 40 + 1);

    assert_ok(&learnorder(
        &[
            "null", "--log", "logs/train.plog", "--data", "data/train.csv",
            "--seed", "9", "--out", "null.plog",
        ],
        dir.path(),
    ));
    assert!(dir.path().join("null.plog").exists());

    assert_ok(&learnorder(
        &[
            "compare", "correlate", "--log-a", "logs/train.plog", "--data-a",
            "data/train.csv", "--log-b", "logs/train.plog", "--data-b",
            "data/train.csv", "--out", "corr.csv",
        ],
        dir.path(),
    ));
    let corr = std::fs::read_to_string(dir.path().join("corr.csv")).unwrap();
    assert!(corr.contains("accessibility,1,"), "corr.csv: {corr}");
}

#[test]
fn exp_structured_produces_documented_layout() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&learnorder(
        &[
            "gen", "gaussian", "--dim", "8", "--n-train-per-class", "15",
            "--n-test-per-class", "8", "--seed", "2", "--out", "data",
        ],
        dir.path(),
    ));
    let config = serde_json::json!({
        "source": {
            "format": "features_csv",
            "train": "data/train.csv",
            "test": "data/test.csv",
            "num_classes": 2
        },
        "mlp": {
            "layer_widths": [8],
            "activation": "relu",
            "learning_rate": 0.05,
            "batch_size": 10,
            "epoch_schedule": [1, 2],
            "seed": 4
        },
        "n_models": 2,
        "bins": 10,
        "bin_fraction": 0.5,
        "seed": 6
    });
    std::fs::write(dir.path().join("exp.json"), config.to_string()).unwrap();
    assert_ok(&learnorder(
        &["exp", "structured", "--config", "exp.json", "--out", "run"],
        dir.path(),
    ));
    for f in [
        "run/manifest.json",
        "run/report.json",
        "run/logs/train.plog",
        "run/logs/test_null.plog",
        "run/metrics/condensed_tpa_train.csv",
        "run/metrics/bimodality_test.csv",
    ] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

#[test]
fn data_load_idx_converts_to_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut images = Vec::new();
    images.extend_from_slice(&0x0000_0803u32.to_be_bytes());
    images.extend_from_slice(&2u32.to_be_bytes());
    images.extend_from_slice(&2u32.to_be_bytes());
    images.extend_from_slice(&2u32.to_be_bytes());
    images.extend_from_slice(&[0, 51, 102, 153, 204, 255, 10, 20]);
    std::fs::write(dir.path().join("images.idx"), images).unwrap();
    let mut labels = Vec::new();
    labels.extend_from_slice(&0x0000_0801u32.to_be_bytes());
    labels.extend_from_slice(&2u32.to_be_bytes());
    labels.extend_from_slice(&[1, 0]);
    std::fs::write(dir.path().join("labels.idx"), labels).unwrap();

    assert_ok(&learnorder(
        &[
            "data", "load-idx", "--images", "images.idx", "--labels", "labels.idx",
            "--out", "digits.csv",
        ],
        dir.path(),
    ));
    let text = std::fs::read_to_string(dir.path().join("digits.csv")).unwrap();
    assert!(text.starts_with("label,f0,f1,f2,f3\n1,0,0.2,0.4,0.6\n"));
}
