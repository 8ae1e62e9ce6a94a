//! Canned experiment recipes: dataset -> ensemble -> metrics -> CSV
//! bundle, each a pure function of its JSON config. Rerunning a recipe
//! with the same config reproduces the output bundle byte for byte.
//!
//! Output layout under the chosen directory:
//!
//! ```text
//! manifest.json    recipe name + full config echo
//! logs/*.plog      prediction logs (real and matched-null)
//! metrics/*.csv    condensed histograms, scores, boxes, correlations
//! report.json      summary statistics
//! ```

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::compare;
use crate::datasets::{self, LabeledDataset, Split};
use crate::io_util::atomic_write;
use crate::learners::{self, BoostConfig, BoostRound, MlpConfig};
use crate::metrics;
use crate::nullmodel;
use crate::predlog::PredictionLog;
use crate::{Error, Result};

/// Seed offset used to derive the second (disjoint) ensemble's seed.
const DISJOINT_SEED_DELTA: u64 = 0x9E37_79B9_7F4A_7C15;
/// Offsets applied to the recipe seed for auxiliary draws.
const SUBSET_SEED_DELTA: u64 = 1;
const SHUFFLE_SEED_DELTA: u64 = 2;
const NULL_SEED_DELTA: u64 = 3;
const NOISE_SEED_DELTA: u64 = 4;

fn default_bins() -> usize {
    50
}

fn default_bin_fraction() -> f64 {
    0.05
}

fn default_tolerance() -> f64 {
    0.01
}

/// Where a recipe's train/test pair comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "snake_case")]
pub enum DataSource {
    /// IDX image/label file pairs (the MNIST container format).
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
    },
    /// Feature CSVs with a shared class count.
    FeaturesCsv {
        train: PathBuf,
        test: PathBuf,
        num_classes: u16,
    },
}

impl DataSource {
    pub fn load(&self) -> Result<(LabeledDataset, LabeledDataset)> {
        match self {
            DataSource::Idx {
                train_images,
                train_labels,
                test_images,
                test_labels,
            } => {
                let train = datasets::load_idx(train_images, train_labels, Split::Train)?;
                let test = datasets::load_idx(test_images, test_labels, Split::Test)?;
                Ok((train, test))
            }
            DataSource::FeaturesCsv {
                train,
                test,
                num_classes,
            } => {
                let train = datasets::load_features_csv(train, *num_classes, Split::Train)?;
                let test = datasets::load_features_csv(test, *num_classes, Split::Test)?;
                Ok((train, test))
            }
        }
    }
}

/// Take a seeded random subset of a dataset (no-op when `count` covers
/// the whole set).
pub fn seeded_subset(
    dataset: &LabeledDataset,
    count: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    if count == 0 || count > dataset.len() {
        return Err(Error::InvalidConfig(format!(
            "subset of {count} from {} examples",
            dataset.len()
        )));
    }
    if count == dataset.len() {
        return Ok(dataset.clone());
    }
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    dataset.select(
        &order[..count],
        format!("{}+subset({count},seed={seed})", dataset.provenance),
    )
}

/// Output directory handles; creates `logs/` and `metrics/`.
struct OutDirs {
    root: PathBuf,
    logs: PathBuf,
    metrics: PathBuf,
}

impl OutDirs {
    fn create(root: &Path) -> Result<OutDirs> {
        let logs = root.join("logs");
        let metrics = root.join("metrics");
        std::fs::create_dir_all(&logs)?;
        std::fs::create_dir_all(&metrics)?;
        Ok(OutDirs {
            root: root.to_path_buf(),
            logs,
            metrics,
        })
    }

    fn write_manifest<C: Serialize>(&self, recipe: &str, config: &C) -> Result<()> {
        let manifest = serde_json::json!({
            "toolkit": "learnorder",
            "version": env!("CARGO_PKG_VERSION"),
            "recipe": recipe,
            "config": config,
        });
        atomic_write(&self.root.join("manifest.json"), |w| {
            serde_json::to_writer_pretty(&mut *w, &manifest)?;
            writeln!(w)?;
            Ok(())
        })
    }

    fn write_report<R: Serialize>(&self, report: &R) -> Result<()> {
        atomic_write(&self.root.join("report.json"), |w| {
            serde_json::to_writer_pretty(&mut *w, report)?;
            writeln!(w)?;
            Ok(())
        })
    }
}

/// Per-extent summary of one labeled split, real collection vs its
/// matched null.
#[derive(Debug, Clone, Serialize)]
pub struct SplitSummary {
    pub split: String,
    pub extents: Vec<u64>,
    pub ensemble_accuracy: Vec<f64>,
    pub mean_model_accuracy: Vec<f64>,
    /// None where the score distribution was degenerate (zero variance).
    pub tpa_bimodality: Vec<Option<f64>>,
    pub null_tpa_bimodality: Vec<Option<f64>>,
    pub mean_agreement: Vec<f64>,
}

fn bimodality_or_none(values: &[f64]) -> Option<f64> {
    metrics::bimodality(values).ok()
}

/// Write the full metric bundle of one labeled split: condensed
/// TP-agreement and agreement histograms (real and matched-null),
/// accessibility, learned-epoch boxes, the per-extent bi-modality
/// table, and both logs.
fn write_split_bundle(
    out: &OutDirs,
    name: &str,
    log: &PredictionLog,
    labels: &[u16],
    bins: usize,
    bin_fraction: f64,
    null_seed: u64,
) -> Result<SplitSummary> {
    let schedule = log.manifest().epoch_schedule.clone();
    let n = log.manifest().num_models;
    let null = nullmodel::null_from(log, labels, null_seed)?;

    log.save(&out.logs.join(format!("{name}.plog")))?;
    null.save(&out.logs.join(format!("{name}_null.plog")))?;

    let h = metrics::condensed(log, labels, bins)?;
    metrics::export_histogram_csv(&h, &schedule, &out.metrics.join(format!("condensed_tpa_{name}.csv")))?;
    let h = metrics::condensed_agreement(log, bins)?;
    metrics::export_histogram_csv(
        &h,
        &schedule,
        &out.metrics.join(format!("condensed_agreement_{name}.csv")),
    )?;
    let h = metrics::condensed(&null, labels, bins)?;
    metrics::export_histogram_csv(
        &h,
        &schedule,
        &out.metrics.join(format!("condensed_tpa_{name}_null.csv")),
    )?;
    let h = metrics::condensed_agreement(&null, bins)?;
    metrics::export_histogram_csv(
        &h,
        &schedule,
        &out.metrics.join(format!("condensed_agreement_{name}_null.csv")),
    )?;

    let access = metrics::accessibility(log, labels)?;
    metrics::export_score_csv(&access, &out.metrics.join(format!("accessibility_{name}.csv")))?;
    let boxes = metrics::learned_epoch_boxes(log, labels, bin_fraction)?;
    metrics::export_learned_epoch_boxes_csv(
        &boxes,
        &out.metrics.join(format!("learned_epoch_boxes_{name}.csv")),
    )?;

    let mut summary = SplitSummary {
        split: name.to_string(),
        extents: schedule.clone(),
        ensemble_accuracy: Vec::new(),
        mean_model_accuracy: Vec::new(),
        tpa_bimodality: Vec::new(),
        null_tpa_bimodality: Vec::new(),
        mean_agreement: Vec::new(),
    };
    let m = labels.len() as f64;
    for e in 0..schedule.len() {
        summary
            .ensemble_accuracy
            .push(metrics::ensemble_accuracy(log, labels, e)?);
        let mut acc = 0.0;
        for i in 0..n {
            acc += log.accuracy(labels, e, i)?;
        }
        summary.mean_model_accuracy.push(acc / n as f64);
        let tpa = metrics::tp_agreement(log, labels, e)?;
        summary.tpa_bimodality.push(bimodality_or_none(&tpa.values));
        let null_tpa = metrics::tp_agreement(&null, labels, e)?;
        summary
            .null_tpa_bimodality
            .push(bimodality_or_none(&null_tpa.values));
        let agr = metrics::agreement(log, e)?;
        summary
            .mean_agreement
            .push(agr.values.iter().sum::<f64>() / m);
    }

    atomic_write(
        &out.metrics.join(format!("bimodality_{name}.csv")),
        |w| {
            writeln!(
                w,
                "extent,ensemble_accuracy,tpa_bimodality,null_tpa_bimodality"
            )?;
            for (e, &extent) in schedule.iter().enumerate() {
                let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                writeln!(
                    w,
                    "{extent},{},{},{}",
                    summary.ensemble_accuracy[e],
                    fmt(summary.tpa_bimodality[e]),
                    fmt(summary.null_tpa_bimodality[e])
                )?;
            }
            Ok(())
        },
    )?;
    Ok(summary)
}

/// Accessibility correlation between the two half-ensembles of a log,
/// the disjoint-collection order-stability check. None when the log
/// holds fewer than two models or a half has degenerate accessibility.
fn half_ensemble_correlation(log: &PredictionLog, labels: &[u16]) -> Option<compare::Correlation> {
    let n = log.manifest().num_models;
    if n < 2 {
        return None;
    }
    let first: Vec<usize> = (0..n / 2).collect();
    let second: Vec<usize> = (n / 2..n).collect();
    let a = log.subset_models(&first).ok()?;
    let b = log.subset_models(&second).ok()?;
    compare::correlate_accessibility(&a, labels, &b, labels).ok()
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleReport {
    pub train: SplitSummary,
    pub test: SplitSummary,
    /// Test-set accessibility correlation between the ensemble's two
    /// disjoint halves.
    pub half_ensemble_test_r: Option<compare::Correlation>,
}

/// Shared driver behind the single-collection recipes: train the
/// ensemble, bundle train and test metrics, and report.
#[allow(clippy::too_many_arguments)]
fn run_ensemble_bundle<C: Serialize>(
    recipe: &str,
    config: &C,
    train: &LabeledDataset,
    test: &LabeledDataset,
    mlp: &MlpConfig,
    n_models: usize,
    bins: usize,
    bin_fraction: f64,
    seed: u64,
    out_dir: &Path,
) -> Result<EnsembleReport> {
    let out = OutDirs::create(out_dir)?;
    out.write_manifest(recipe, config)?;
    let logs = learners::train_mlp_ensemble(train, &[test], mlp, n_models)?;
    let train_summary = write_split_bundle(
        &out,
        "train",
        &logs[0],
        &train.labels,
        bins,
        bin_fraction,
        seed.wrapping_add(NULL_SEED_DELTA),
    )?;
    let test_summary = write_split_bundle(
        &out,
        "test",
        &logs[1],
        &test.labels,
        bins,
        bin_fraction,
        seed.wrapping_add(NULL_SEED_DELTA).wrapping_add(1),
    )?;
    let report = EnsembleReport {
        train: train_summary,
        test: test_summary,
        half_ensemble_test_r: half_ensemble_correlation(&logs[1], &test.labels),
    };
    out.write_report(&report)?;
    Ok(report)
}

/// Structured-data run over an ingested dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructuredConfig {
    pub source: DataSource,
    /// Optional seeded subset of the training examples.
    #[serde(default)]
    pub train_subset: Option<usize>,
    pub mlp: MlpConfig,
    pub n_models: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_bin_fraction")]
    pub bin_fraction: f64,
    pub seed: u64,
}

pub fn run_structured(config: &StructuredConfig, out_dir: &Path) -> Result<EnsembleReport> {
    let (mut train, test) = config.source.load()?;
    if let Some(count) = config.train_subset {
        train = seeded_subset(&train, count, config.seed.wrapping_add(SUBSET_SEED_DELTA))?;
    }
    run_ensemble_bundle(
        "structured",
        config,
        &train,
        &test,
        &config.mlp,
        config.n_models,
        config.bins,
        config.bin_fraction,
        config.seed,
        out_dir,
    )
}

/// Overlapping-Gaussian run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianRunConfig {
    pub dim: usize,
    pub mean_shift: f64,
    pub n_train_per_class: usize,
    pub n_test_per_class: usize,
    pub mlp: MlpConfig,
    pub n_models: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_bin_fraction")]
    pub bin_fraction: f64,
    pub seed: u64,
}

pub fn run_gaussian(config: &GaussianRunConfig, out_dir: &Path) -> Result<EnsembleReport> {
    let (train, test) = datasets::gen_gaussian(
        config.dim,
        config.mean_shift,
        config.n_train_per_class,
        config.n_test_per_class,
        config.seed,
    )?;
    run_ensemble_bundle(
        "gaussian",
        config,
        &train,
        &test,
        &config.mlp,
        config.n_models,
        config.bins,
        config.bin_fraction,
        config.seed,
        out_dir,
    )
}

/// Random-label run: both the train subset and the test set get
/// independently shuffled labels before training.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomLabelsConfig {
    pub source: DataSource,
    #[serde(default)]
    pub train_subset: Option<usize>,
    pub mlp: MlpConfig,
    pub n_models: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_bin_fraction")]
    pub bin_fraction: f64,
    pub seed: u64,
}

pub fn run_random_labels(config: &RandomLabelsConfig, out_dir: &Path) -> Result<EnsembleReport> {
    let (mut train, test) = config.source.load()?;
    if let Some(count) = config.train_subset {
        train = seeded_subset(&train, count, config.seed.wrapping_add(SUBSET_SEED_DELTA))?;
    }
    let shuffle_seed = config.seed.wrapping_add(SHUFFLE_SEED_DELTA);
    let train = datasets::shuffle_labels(&train, shuffle_seed);
    let test = datasets::shuffle_labels(&test, shuffle_seed.wrapping_add(1));
    run_ensemble_bundle(
        "random_labels",
        config,
        &train,
        &test,
        &config.mlp,
        config.n_models,
        config.bins,
        config.bin_fraction,
        config.seed,
        out_dir,
    )
}

/// Gabor-patch run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaborRunConfig {
    #[serde(default)]
    pub gabor: datasets::GaborConfig,
    pub mlp: MlpConfig,
    pub n_models: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_bin_fraction")]
    pub bin_fraction: f64,
    pub seed: u64,
}

pub fn run_gabor(config: &GaborRunConfig, out_dir: &Path) -> Result<EnsembleReport> {
    let (train, test) = datasets::gen_gabor(&config.gabor, config.seed)?;
    run_ensemble_bundle(
        "gabor",
        config,
        &train,
        &test,
        &config.mlp,
        config.n_models,
        config.bins,
        config.bin_fraction,
        config.seed,
        out_dir,
    )
}

/// Partitioned-training run: disjoint training partitions, one ensemble
/// per partition, all evaluated on the shared test set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionsConfig {
    pub source: DataSource,
    #[serde(default)]
    pub train_subset: Option<usize>,
    pub parts: usize,
    pub mlp: MlpConfig,
    pub n_models: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionPairCorrelation {
    pub part_a: usize,
    pub part_b: usize,
    pub r: f64,
    pub log10_p: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionsReport {
    pub parts: usize,
    pub partition_sizes: Vec<usize>,
    pub test_accuracy_final: Vec<f64>,
    /// Cross-partition accessibility correlations on the shared test set.
    pub pairwise_test_r: Vec<PartitionPairCorrelation>,
}

pub fn run_partitions(config: &PartitionsConfig, out_dir: &Path) -> Result<PartitionsReport> {
    let out = OutDirs::create(out_dir)?;
    out.write_manifest("partitions", config)?;
    let (mut train, test) = config.source.load()?;
    if let Some(count) = config.train_subset {
        train = seeded_subset(&train, count, config.seed.wrapping_add(SUBSET_SEED_DELTA))?;
    }
    let parts = datasets::partition(&train, config.parts, config.seed)?;

    let mut test_logs = Vec::with_capacity(parts.len());
    let mut sizes = Vec::with_capacity(parts.len());
    for (p, part) in parts.iter().enumerate() {
        let mut mlp = config.mlp.clone();
        mlp.seed = config.mlp.seed.wrapping_add((p as u64) << 32);
        let logs = learners::train_mlp_ensemble(part, &[&test], &mlp, config.n_models)?;
        logs[0].save(&out.logs.join(format!("partition{p}_train.plog")))?;
        logs[1].save(&out.logs.join(format!("partition{p}_test.plog")))?;
        let h = metrics::condensed(&logs[1], &test.labels, config.bins)?;
        metrics::export_histogram_csv(
            &h,
            &config.mlp.epoch_schedule,
            &out.metrics.join(format!("condensed_tpa_test_part{p}.csv")),
        )?;
        let access = metrics::accessibility(&logs[1], &test.labels)?;
        metrics::export_score_csv(
            &access,
            &out.metrics.join(format!("accessibility_test_part{p}.csv")),
        )?;
        sizes.push(part.len());
        test_logs.push(logs.into_iter().nth(1).unwrap());
    }

    let mut pairwise = Vec::new();
    for a in 0..test_logs.len() {
        for b in a + 1..test_logs.len() {
            let c = compare::correlate_accessibility(
                &test_logs[a],
                &test.labels,
                &test_logs[b],
                &test.labels,
            )?;
            pairwise.push(PartitionPairCorrelation {
                part_a: a,
                part_b: b,
                r: c.r,
                log10_p: c.log10_p,
            });
        }
    }
    atomic_write(&out.metrics.join("partition_correlations.csv"), |w| {
        writeln!(w, "part_a,part_b,r,log10_p")?;
        for p in &pairwise {
            writeln!(w, "{},{},{},{}", p.part_a, p.part_b, p.r, p.log10_p)?;
        }
        Ok(())
    })?;

    let final_extent = config.mlp.epoch_schedule.len() - 1;
    let report = PartitionsReport {
        parts: config.parts,
        partition_sizes: sizes,
        test_accuracy_final: test_logs
            .iter()
            .map(|l| metrics::ensemble_accuracy(l, &test.labels, final_extent))
            .collect::<Result<_>>()?,
        pairwise_test_r: pairwise,
    };
    out.write_report(&report)?;
    Ok(report)
}

/// Paradigm-contrast run: two disjoint MLP ensembles plus AdaBoost on
/// the same training set; accessibility correlations and the binned
/// boosting-vs-network comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParadigmsConfig {
    pub source: DataSource,
    #[serde(default)]
    pub train_subset: Option<usize>,
    pub mlp: MlpConfig,
    pub n_models: usize,
    pub boost: BoostConfig,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParadigmsReport {
    /// Disjoint MLP collections, train-set accessibility.
    pub r_nn_nn_train: compare::Correlation,
    /// AdaBoost vs the first MLP collection, train-set accessibility.
    pub r_nn_boost_train: compare::Correlation,
    pub r_nn_nn_test: compare::Correlation,
    pub r_nn_boost_test: compare::Correlation,
    pub boost_final_train_accuracy: f64,
    pub boost_final_test_accuracy: f64,
    pub nn_final_test_accuracy: f64,
    pub boost_rounds: Vec<BoostRound>,
}

pub fn run_paradigms(config: &ParadigmsConfig, out_dir: &Path) -> Result<ParadigmsReport> {
    let out = OutDirs::create(out_dir)?;
    out.write_manifest("paradigms", config)?;
    let (mut train, test) = config.source.load()?;
    if let Some(count) = config.train_subset {
        train = seeded_subset(&train, count, config.seed.wrapping_add(SUBSET_SEED_DELTA))?;
    }

    let logs_a = learners::train_mlp_ensemble(&train, &[&test], &config.mlp, config.n_models)?;
    let mut mlp_b = config.mlp.clone();
    mlp_b.seed = config.mlp.seed.wrapping_add(DISJOINT_SEED_DELTA);
    let logs_b = learners::train_mlp_ensemble(&train, &[&test], &mlp_b, config.n_models)?;
    let boost = learners::train_adaboost(&train, &[&test], &config.boost)?;

    for (name, log) in [
        ("nn_a_train", &logs_a[0]),
        ("nn_a_test", &logs_a[1]),
        ("nn_b_train", &logs_b[0]),
        ("nn_b_test", &logs_b[1]),
        ("adaboost_train", &boost.logs[0]),
        ("adaboost_test", &boost.logs[1]),
    ] {
        log.save(&out.logs.join(format!("{name}.plog")))?;
    }

    let access_nn_train = metrics::accessibility(&logs_a[0], &train.labels)?;
    let access_boost_train = metrics::accessibility(&boost.logs[0], &train.labels)?;
    let binned = compare::binned_comparison(
        &access_boost_train.values,
        &access_nn_train.values,
        config.bins,
    )?;
    compare::write_binned_csv(&binned, &out.metrics.join("binned_boost_vs_nn_train.csv"))?;
    metrics::export_score_csv(
        &access_nn_train,
        &out.metrics.join("accessibility_nn_a_train.csv"),
    )?;
    metrics::export_score_csv(
        &access_boost_train,
        &out.metrics.join("accessibility_adaboost_train.csv"),
    )?;

    let paired = compare::comparison_report(
        &logs_a[1],
        &boost.logs[1],
        &test.labels,
        config.tolerance,
        config.bins,
    )?;
    paired.write_json(&out.metrics.join("nn_vs_boost_test_comparison.json"))?;
    paired.write_pairs_overlap_csv(&out.metrics.join("nn_vs_boost_test_pairs_overlap.csv"))?;

    let final_nn = config.mlp.epoch_schedule.len() - 1;
    let final_boost = boost.logs[0].manifest().num_epochs() - 1;
    let report = ParadigmsReport {
        r_nn_nn_train: compare::correlate_accessibility(
            &logs_a[0],
            &train.labels,
            &logs_b[0],
            &train.labels,
        )?,
        r_nn_boost_train: compare::correlate_accessibility(
            &logs_a[0],
            &train.labels,
            &boost.logs[0],
            &train.labels,
        )?,
        r_nn_nn_test: compare::correlate_accessibility(
            &logs_a[1],
            &test.labels,
            &logs_b[1],
            &test.labels,
        )?,
        r_nn_boost_test: compare::correlate_accessibility(
            &logs_a[1],
            &test.labels,
            &boost.logs[1],
            &test.labels,
        )?,
        boost_final_train_accuracy: metrics::ensemble_accuracy(
            &boost.logs[0],
            &train.labels,
            final_boost,
        )?,
        boost_final_test_accuracy: metrics::ensemble_accuracy(
            &boost.logs[1],
            &test.labels,
            final_boost,
        )?,
        nn_final_test_accuracy: metrics::ensemble_accuracy(&logs_a[1], &test.labels, final_nn)?,
        boost_rounds: boost.rounds,
    };
    out.write_report(&report)?;
    Ok(report)
}

/// Out-of-sample agreement run: the ensemble is evaluated on the test
/// set and on generated noise images, against a chance-accuracy null.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutOfSampleConfig {
    pub source: DataSource,
    #[serde(default)]
    pub train_subset: Option<usize>,
    pub mlp: MlpConfig,
    pub n_models: usize,
    pub noise_count: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutOfSampleReport {
    pub extents: Vec<u64>,
    pub mean_agreement_test: Vec<f64>,
    pub mean_agreement_noise: Vec<f64>,
    /// Agreement of a chance-accuracy null (a random assignment of
    /// labels) over the noise set.
    pub mean_agreement_null: Vec<f64>,
}

pub fn run_out_of_sample(config: &OutOfSampleConfig, out_dir: &Path) -> Result<OutOfSampleReport> {
    let out = OutDirs::create(out_dir)?;
    out.write_manifest("out_of_sample", config)?;
    let (mut train, test) = config.source.load()?;
    if let Some(count) = config.train_subset {
        train = seeded_subset(&train, count, config.seed.wrapping_add(SUBSET_SEED_DELTA))?;
    }
    let noise = datasets::gen_noise(
        config.noise_count,
        train.dim(),
        config.seed.wrapping_add(NOISE_SEED_DELTA),
    )?;
    let logs = learners::train_mlp_ensemble(&train, &[&test, &noise], &config.mlp, config.n_models)?;
    let (test_log, noise_log) = (&logs[1], &logs[2]);

    // chance baseline: accuracy 1/K everywhere, evaluated on as many
    // examples as the noise set
    let k = train.num_classes;
    let chance = vec![vec![1.0 / k as f64; config.n_models]; config.mlp.epoch_schedule.len()];
    let null = nullmodel::null_log(&chance, &noise.labels, k, config.seed.wrapping_add(NULL_SEED_DELTA))?;

    test_log.save(&out.logs.join("test.plog"))?;
    noise_log.save(&out.logs.join("noise.plog"))?;
    null.save(&out.logs.join("noise_null.plog"))?;

    let schedule = config.mlp.epoch_schedule.clone();
    for (name, log) in [("test", test_log), ("noise", noise_log), ("noise_null", &null)] {
        let h = metrics::condensed_agreement(log, config.bins)?;
        metrics::export_histogram_csv(
            &h,
            &schedule,
            &out.metrics.join(format!("condensed_agreement_{name}.csv")),
        )?;
    }

    let num_epochs = schedule.len();
    let mean_agreement = |log: &PredictionLog| -> Result<Vec<f64>> {
        (0..num_epochs)
            .map(|e| {
                let a = metrics::agreement(log, e)?;
                Ok(a.values.iter().sum::<f64>() / a.values.len() as f64)
            })
            .collect()
    };
    let report = OutOfSampleReport {
        extents: schedule,
        mean_agreement_test: mean_agreement(test_log)?,
        mean_agreement_noise: mean_agreement(noise_log)?,
        mean_agreement_null: mean_agreement(&null)?,
    };
    atomic_write(&out.metrics.join("mean_agreement.csv"), |w| {
        writeln!(w, "extent,test,noise,noise_null")?;
        for (e, &extent) in report.extents.iter().enumerate() {
            writeln!(
                w,
                "{extent},{},{},{}",
                report.mean_agreement_test[e],
                report.mean_agreement_noise[e],
                report.mean_agreement_null[e]
            )?;
        }
        Ok(())
    })?;
    out.write_report(&report)?;
    Ok(report)
}
