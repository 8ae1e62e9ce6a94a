//! Command-line front end for the learnorder toolkit.
//!
//! Subcommands mirror the library layout: `gen` and `data` produce and
//! ingest datasets, `train` records prediction logs, `analyze` computes
//! per-example statistics, `null` builds accuracy-matched baselines,
//! `compare` relates two collections, and `exp` runs the canned
//! experiment recipes. Every command validates its inputs before any
//! output file is touched, writes outputs atomically, and exits with
//! code 1 on runtime errors (clap itself exits with 2 on usage errors).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use learnorder::compare;
use learnorder::datasets::{self, LabeledDataset, Split};
use learnorder::experiments;
use learnorder::learners;
use learnorder::metrics;
use learnorder::nullmodel;
use learnorder::predlog::{Manifest, PredictionLog};

#[derive(Parser)]
#[command(
    name = "learnorder",
    version,
    about = "Agreement statistics and learning-order analysis for classifier collections"
)]
struct Cli {
    /// Override the seed used by the command (generators, trainers,
    /// null models, experiment recipes).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cap the worker-thread count; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic datasets.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Load, validate, and transform dataset files.
    #[command(subcommand)]
    Data(DataCommand),
    /// Train a learner collection and record prediction logs.
    #[command(subcommand)]
    Train(TrainCommand),
    /// Compute agreement statistics over a sealed log.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Build the accuracy-matched null log for a sealed log.
    Null(NullArgs),
    /// Cross-collection analyses over two logs.
    #[command(subcommand)]
    Compare(CompareCommand),
    /// Run a canned experiment recipe from a JSON config.
    #[command(subcommand)]
    Exp(ExpCommand),
}

#[derive(Subcommand)]
enum GenCommand {
    /// Two overlapping Gaussian classes (defaults are the desk-scale
    /// configuration; raise --dim to 3072 and counts to 2500/500 for
    /// the full-scale variant).
    Gaussian {
        #[arg(long, default_value_t = 256)]
        dim: usize,
        #[arg(long, default_value_t = 0.1)]
        mean_shift: f64,
        #[arg(long, default_value_t = 1000)]
        n_train_per_class: usize,
        #[arg(long, default_value_t = 200)]
        n_test_per_class: usize,
        /// Output directory for train.csv and test.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// 12-class Gabor patch images (3 color channels x 4 orientations).
    Gabor {
        #[arg(long, default_value_t = 32)]
        img_size: usize,
        #[arg(long, default_value_t = 100)]
        n_train_per_class: usize,
        #[arg(long, default_value_t = 20)]
        n_test_per_class: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// I.i.d. standard-normal noise vectors with placeholder labels.
    Noise {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        dim: usize,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Replace every label with a uniform draw over the classes.
    ShuffleLabels {
        /// Input feature CSV.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        num_classes: u16,
        #[arg(long)]
        out: PathBuf,
    },
    /// Randomly split a dataset into disjoint partitions.
    Partition {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        num_classes: u16,
        #[arg(long)]
        parts: usize,
        /// Output directory for part0.csv, part1.csv, ...
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum DataCommand {
    /// Convert an IDX image/label pair to the feature CSV format
    /// (pixels scaled to [0, 1]).
    LoadIdx {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a feature CSV and print its shape.
    LoadCsv {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        num_classes: u16,
    },
    /// Normalize features to zero mean and unit std, with statistics
    /// computed on the train file and applied to every file.
    Normalize {
        #[arg(long)]
        train: PathBuf,
        /// Additional files receiving the train statistics.
        #[arg(long)]
        apply: Vec<PathBuf>,
        #[arg(long)]
        num_classes: u16,
        /// Output directory; files keep their names.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum TrainCommand {
    /// Train an ensemble of fully connected networks.
    Mlp {
        /// Training feature CSV.
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        num_classes: u16,
        /// Eval feature CSVs; each produces its own log.
        #[arg(long)]
        eval: Vec<PathBuf>,
        /// MLP config JSON (layer_widths, activation, learning_rate,
        /// batch_size, epoch_schedule, dropout_rate, seed, ...).
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        n_models: usize,
        /// Retrain from scratch per extent instead of snapshotting one
        /// run per model.
        #[arg(long)]
        retrain_per_extent: bool,
        /// Output directory for train.plog and eval logs.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train multi-class AdaBoost with linear weak learners.
    Adaboost {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        num_classes: u16,
        #[arg(long)]
        eval: Vec<PathBuf>,
        /// Boost config JSON (num_weak, weak_epochs, weak_lr,
        /// snapshot_schedule, seed, ...).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// A sealed log argument: either a binary .plog file or a CSV cell file
/// paired with a manifest JSON.
#[derive(Args)]
struct LogInput {
    /// Binary prediction log.
    #[arg(long, conflicts_with_all = ["log_csv", "log_manifest"])]
    log: Option<PathBuf>,
    /// CSV cell file (requires --log-manifest).
    #[arg(long, requires = "log_manifest")]
    log_csv: Option<PathBuf>,
    /// Manifest JSON accompanying --log-csv.
    #[arg(long, requires = "log_csv")]
    log_manifest: Option<PathBuf>,
}

impl LogInput {
    fn load(&self) -> anyhow::Result<PredictionLog> {
        match (&self.log, &self.log_csv, &self.log_manifest) {
            (Some(path), None, None) => {
                PredictionLog::load(path).with_context(|| format!("loading {}", path.display()))
            }
            (None, Some(csv), Some(manifest_path)) => {
                let manifest: Manifest =
                    serde_json::from_str(&std::fs::read_to_string(manifest_path)?)
                        .with_context(|| format!("parsing {}", manifest_path.display()))?;
                PredictionLog::import_csv(csv, manifest)
                    .with_context(|| format!("importing {}", csv.display()))
            }
            _ => bail!("pass either --log or both --log-csv and --log-manifest"),
        }
    }
}

/// Labels come from a feature CSV; the class count is taken from the
/// log's manifest.
fn load_labels(data: &std::path::Path, num_classes: u16) -> anyhow::Result<Vec<u16>> {
    let ds = datasets::load_features_csv(data, num_classes, Split::Train)
        .with_context(|| format!("loading {}", data.display()))?;
    Ok(ds.labels)
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Per-example TP-agreement at one extent.
    Tpa {
        #[command(flatten)]
        log: LogInput,
        /// Feature CSV supplying the ground-truth labels.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        epoch_index: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-example agreement (label-free) at one extent.
    Agreement {
        #[command(flatten)]
        log: LogInput,
        #[arg(long)]
        epoch_index: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-example accessibility (mean TP-agreement over all extents).
    Accessibility {
        #[command(flatten)]
        log: LogInput,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-extent Pearson bi-modality of the TP-agreement distribution.
    Bimodality {
        #[command(flatten)]
        log: LogInput,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extent x bin histogram of TP-agreement or agreement scores.
    Condensed {
        #[command(flatten)]
        log: LogInput,
        /// Required for --kind tpa.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = CondensedKind::Tpa)]
        kind: CondensedKind,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Learned-epoch summary: accessibility-ordered box bins, or one
    /// model's raw learned extents with --model.
    LearnedEpoch {
        #[command(flatten)]
        log: LogInput,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        bin_fraction: f64,
        /// Emit per-example learned extents of this model instead of
        /// the binned summary.
        #[arg(long)]
        model: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-example plurality label at one extent.
    Modal {
        #[command(flatten)]
        log: LogInput,
        #[arg(long)]
        epoch_index: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// One example's TP-agreement across every extent.
    Trajectory {
        #[command(flatten)]
        log: LogInput,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        example_index: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CondensedKind {
    Tpa,
    Agreement,
}

#[derive(Args)]
struct NullArgs {
    #[command(flatten)]
    log: LogInput,
    /// Feature CSV supplying the ground-truth labels.
    #[arg(long)]
    data: PathBuf,
    /// Output .plog path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum CompareCommand {
    /// Match extents of two collections by ensemble accuracy.
    Match {
        #[arg(long)]
        log_a: PathBuf,
        #[arg(long)]
        log_b: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Matched pairs plus overlap counts of majority-vote-correct sets.
    Overlap {
        #[arg(long)]
        log_a: PathBuf,
        #[arg(long)]
        log_b: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pearson correlation of the two collections' accessibility.
    Correlate {
        #[arg(long)]
        log_a: PathBuf,
        #[arg(long)]
        data_a: PathBuf,
        #[arg(long)]
        log_b: PathBuf,
        #[arg(long)]
        data_b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bin one score CSV against another (both in
    /// `example_index,value` form).
    Binned {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value_t = 10)]
        bins: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ExpCommand {
    /// Structured-data run (ingested dataset).
    Structured(ExpArgs),
    /// Overlapping-Gaussian run.
    Gaussian(ExpArgs),
    /// Random-label memorization run.
    RandomLabels(ExpArgs),
    /// Gabor-patch run.
    Gabor(ExpArgs),
    /// Partitioned-training run.
    Partitions(ExpArgs),
    /// MLP vs AdaBoost paradigm contrast.
    Paradigms(ExpArgs),
    /// Out-of-sample agreement run (test set vs noise vs null).
    Oos(ExpArgs),
}

#[derive(Args)]
struct ExpArgs {
    /// Recipe config JSON; the schema matches the recipe's config
    /// struct (see the library docs and README).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (manifest.json, logs/, metrics/, report.json).
    #[arg(long)]
    out: PathBuf,
}

fn parse_config<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_score_csv(scores: &metrics::ScoreVector, out: &std::path::Path) -> anyhow::Result<()> {
    metrics::export_score_csv(scores, out)?;
    Ok(())
}

/// Read a score CSV written by the analyze commands.
fn read_score_csv(path: &std::path::Path) -> anyhow::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("example_index,value") => {}
        other => bail!(
            "{}: expected header 'example_index,value', got {:?}",
            path.display(),
            other
        ),
    }
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value = line
            .split(',')
            .nth(1)
            .with_context(|| format!("{}: line {} lacks a value", path.display(), i + 2))?;
        values.push(value.trim().parse::<f64>()?);
    }
    Ok(values)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("installing worker pool")?;
    }
    let seed = cli.seed;
    match cli.command {
        Command::Gen(cmd) => run_gen(cmd, seed.unwrap_or(0)),
        Command::Data(cmd) => run_data(cmd),
        Command::Train(cmd) => run_train(cmd, seed),
        Command::Analyze(cmd) => run_analyze(cmd),
        Command::Null(args) => {
            let log = args.log.load()?;
            let labels = load_labels(&args.data, log.manifest().num_classes)?;
            let null = nullmodel::null_from(&log, &labels, seed.unwrap_or(0))?;
            null.save(&args.out)?;
            println!("wrote {}", args.out.display());
            Ok(())
        }
        Command::Compare(cmd) => run_compare(cmd),
        Command::Exp(cmd) => run_exp(cmd, seed),
    }
}

fn run_gen(cmd: GenCommand, seed: u64) -> anyhow::Result<()> {
    match cmd {
        GenCommand::Gaussian {
            dim,
            mean_shift,
            n_train_per_class,
            n_test_per_class,
            out,
        } => {
            let (train, test) =
                datasets::gen_gaussian(dim, mean_shift, n_train_per_class, n_test_per_class, seed)?;
            std::fs::create_dir_all(&out)?;
            datasets::export_features_csv(&train, &out.join("train.csv"))?;
            datasets::export_features_csv(&test, &out.join("test.csv"))?;
            println!("wrote {}/train.csv and {}/test.csv", out.display(), out.display());
        }
        GenCommand::Gabor {
            img_size,
            n_train_per_class,
            n_test_per_class,
            out,
        } => {
            let config = datasets::GaborConfig {
                img_size,
                n_train_per_class,
                n_test_per_class,
                ..datasets::GaborConfig::default()
            };
            let (train, test) = datasets::gen_gabor(&config, seed)?;
            std::fs::create_dir_all(&out)?;
            datasets::export_features_csv(&train, &out.join("train.csv"))?;
            datasets::export_features_csv(&test, &out.join("test.csv"))?;
            println!("wrote {}/train.csv and {}/test.csv", out.display(), out.display());
        }
        GenCommand::Noise { count, dim, out } => {
            let noise = datasets::gen_noise(count, dim, seed)?;
            datasets::export_features_csv(&noise, &out)?;
            println!("wrote {}", out.display());
        }
        GenCommand::ShuffleLabels {
            input,
            num_classes,
            out,
        } => {
            let ds = datasets::load_features_csv(&input, num_classes, Split::Train)?;
            let shuffled = datasets::shuffle_labels(&ds, seed);
            datasets::export_features_csv(&shuffled, &out)?;
            println!("wrote {}", out.display());
        }
        GenCommand::Partition {
            input,
            num_classes,
            parts,
            out,
        } => {
            let ds = datasets::load_features_csv(&input, num_classes, Split::Train)?;
            let partitions = datasets::partition(&ds, parts, seed)?;
            std::fs::create_dir_all(&out)?;
            for (p, part) in partitions.iter().enumerate() {
                datasets::export_features_csv(part, &out.join(format!("part{p}.csv")))?;
            }
            println!("wrote {parts} partitions under {}", out.display());
        }
    }
    Ok(())
}

fn run_data(cmd: DataCommand) -> anyhow::Result<()> {
    match cmd {
        DataCommand::LoadIdx { images, labels, out } => {
            let ds = datasets::load_idx(&images, &labels, Split::Train)?;
            datasets::export_features_csv(&ds, &out)?;
            println!(
                "wrote {} ({} examples, {} features, {} classes)",
                out.display(),
                ds.len(),
                ds.dim(),
                ds.num_classes
            );
        }
        DataCommand::LoadCsv { input, num_classes } => {
            let ds = datasets::load_features_csv(&input, num_classes, Split::Train)?;
            println!(
                "{}: {} examples, {} features, {} classes",
                input.display(),
                ds.len(),
                ds.dim(),
                ds.num_classes
            );
        }
        DataCommand::Normalize {
            train,
            apply,
            num_classes,
            out,
        } => {
            let mut train_ds = datasets::load_features_csv(&train, num_classes, Split::Train)?;
            let mut others: Vec<LabeledDataset> = apply
                .iter()
                .map(|p| datasets::load_features_csv(p, num_classes, Split::Test))
                .collect::<learnorder::Result<_>>()?;
            {
                let mut refs: Vec<&mut LabeledDataset> = others.iter_mut().collect();
                datasets::normalize_per_feature(&mut train_ds, &mut refs)?;
            }
            std::fs::create_dir_all(&out)?;
            let name = |p: &PathBuf| -> anyhow::Result<String> {
                Ok(p.file_name()
                    .context("input path has no file name")?
                    .to_string_lossy()
                    .into_owned())
            };
            datasets::export_features_csv(&train_ds, &out.join(name(&train)?))?;
            for (p, ds) in apply.iter().zip(&others) {
                datasets::export_features_csv(ds, &out.join(name(p)?))?;
            }
            println!("wrote normalized files under {}", out.display());
        }
    }
    Ok(())
}

fn run_train(cmd: TrainCommand, seed: Option<u64>) -> anyhow::Result<()> {
    match cmd {
        TrainCommand::Mlp {
            train,
            num_classes,
            eval,
            config,
            n_models,
            retrain_per_extent,
            out,
        } => {
            let mut mlp: learners::MlpConfig = parse_config(&config)?;
            if let Some(seed) = seed {
                mlp.seed = seed;
            }
            if retrain_per_extent {
                mlp.retrain_per_extent = true;
            }
            let train_ds = datasets::load_features_csv(&train, num_classes, Split::Train)?;
            let eval_ds: Vec<LabeledDataset> = eval
                .iter()
                .map(|p| datasets::load_features_csv(p, num_classes, Split::Test))
                .collect::<learnorder::Result<_>>()?;
            let eval_refs: Vec<&LabeledDataset> = eval_ds.iter().collect();
            let logs = learners::train_mlp_ensemble(&train_ds, &eval_refs, &mlp, n_models)?;
            std::fs::create_dir_all(&out)?;
            logs[0].save(&out.join("train.plog"))?;
            for (i, (log, path)) in logs[1..].iter().zip(&eval).enumerate() {
                let stem = path
                    .file_stem()
                    .context("eval path has no file name")?
                    .to_string_lossy();
                log.save(&out.join(format!("eval{i}_{stem}.plog")))?;
            }
            println!("wrote {} logs under {}", logs.len(), out.display());
        }
        TrainCommand::Adaboost {
            train,
            num_classes,
            eval,
            config,
            out,
        } => {
            let mut boost: learners::BoostConfig = parse_config(&config)?;
            if let Some(seed) = seed {
                boost.seed = seed;
            }
            let train_ds = datasets::load_features_csv(&train, num_classes, Split::Train)?;
            let eval_ds: Vec<LabeledDataset> = eval
                .iter()
                .map(|p| datasets::load_features_csv(p, num_classes, Split::Test))
                .collect::<learnorder::Result<_>>()?;
            let eval_refs: Vec<&LabeledDataset> = eval_ds.iter().collect();
            let run = learners::train_adaboost(&train_ds, &eval_refs, &boost)?;
            std::fs::create_dir_all(&out)?;
            run.logs[0].save(&out.join("train.plog"))?;
            for (i, (log, path)) in run.logs[1..].iter().zip(&eval).enumerate() {
                let stem = path
                    .file_stem()
                    .context("eval path has no file name")?
                    .to_string_lossy();
                log.save(&out.join(format!("eval{i}_{stem}.plog")))?;
            }
            let rounds = serde_json::to_string_pretty(&run.rounds)?;
            std::fs::write(out.join("rounds.json"), rounds)?;
            println!(
                "boosted {} rounds; wrote {} logs under {}",
                run.rounds.len(),
                run.logs.len(),
                out.display()
            );
        }
    }
    Ok(())
}

fn run_analyze(cmd: AnalyzeCommand) -> anyhow::Result<()> {
    match cmd {
        AnalyzeCommand::Tpa {
            log,
            data,
            epoch_index,
            out,
        } => {
            let log = log.load()?;
            let labels = load_labels(&data, log.manifest().num_classes)?;
            let scores = metrics::tp_agreement(&log, &labels, epoch_index)?;
            write_score_csv(&scores, &out)?;
        }
        AnalyzeCommand::Agreement {
            log,
            epoch_index,
            out,
        } => {
            let log = log.load()?;
            let scores = metrics::agreement(&log, epoch_index)?;
            write_score_csv(&scores, &out)?;
        }
        AnalyzeCommand::Accessibility { log, data, out } => {
            let log = log.load()?;
            let labels = load_labels(&data, log.manifest().num_classes)?;
            let scores = metrics::accessibility(&log, &labels)?;
            write_score_csv(&scores, &out)?;
        }
        AnalyzeCommand::Bimodality { log, data, out } => {
            let log = log.load()?;
            let labels = load_labels(&data, log.manifest().num_classes)?;
            let schedule = log.manifest().epoch_schedule.clone();
            learnorder::io::atomic_write(&out, |w| {
                use std::io::Write;
                writeln!(w, "extent,ensemble_accuracy,tpa_bimodality")?;
                for (e, &extent) in schedule.iter().enumerate() {
                    let acc = metrics::ensemble_accuracy(&log, &labels, e)?;
                    let tpa = metrics::tp_agreement(&log, &labels, e)?;
                    let score = metrics::bimodality(&tpa.values)
                        .map(|v| v.to_string())
                        .unwrap_or_default();
                    writeln!(w, "{extent},{acc},{score}")?;
                }
                Ok(())
            })?;
        }
        AnalyzeCommand::Condensed {
            log,
            data,
            kind,
            bins,
            out,
        } => {
            let log = log.load()?;
            let h = match kind {
                CondensedKind::Tpa => {
                    let data = data.context("--kind tpa requires --data for labels")?;
                    let labels = load_labels(&data, log.manifest().num_classes)?;
                    metrics::condensed(&log, &labels, bins)?
                }
                CondensedKind::Agreement => metrics::condensed_agreement(&log, bins)?,
            };
            metrics::export_histogram_csv(&h, &log.manifest().epoch_schedule, &out)?;
        }
        AnalyzeCommand::LearnedEpoch {
            log,
            data,
            bin_fraction,
            model,
            out,
        } => {
            let log = log.load()?;
            let labels = load_labels(&data, log.manifest().num_classes)?;
            match model {
                Some(model_index) => {
                    let learned = metrics::learned_epoch(&log, &labels, model_index)?;
                    learnorder::io::atomic_write(&out, |w| {
                        use std::io::Write;
                        writeln!(w, "example_index,learned_epoch_index")?;
                        for (j, e) in learned.iter().enumerate() {
                            writeln!(w, "{j},{e}")?;
                        }
                        Ok(())
                    })?;
                }
                None => {
                    let boxes = metrics::learned_epoch_boxes(&log, &labels, bin_fraction)?;
                    metrics::export_learned_epoch_boxes_csv(&boxes, &out)?;
                }
            }
        }
        AnalyzeCommand::Modal {
            log,
            epoch_index,
            out,
        } => {
            let log = log.load()?;
            let modal = metrics::modal_label(&log, epoch_index)?;
            learnorder::io::atomic_write(&out, |w| {
                use std::io::Write;
                writeln!(w, "example_index,modal_label")?;
                for (j, label) in modal.iter().enumerate() {
                    writeln!(w, "{j},{label}")?;
                }
                Ok(())
            })?;
        }
        AnalyzeCommand::Trajectory {
            log,
            data,
            example_index,
            out,
        } => {
            let log = log.load()?;
            let labels = load_labels(&data, log.manifest().num_classes)?;
            let values = metrics::trajectory(&log, &labels, example_index)?;
            let schedule = log.manifest().epoch_schedule.clone();
            learnorder::io::atomic_write(&out, |w| {
                use std::io::Write;
                writeln!(w, "extent,tp_agreement")?;
                for (&extent, v) in schedule.iter().zip(&values) {
                    writeln!(w, "{extent},{v}")?;
                }
                Ok(())
            })?;
        }
    }
    println!("ok");
    Ok(())
}

fn run_compare(cmd: CompareCommand) -> anyhow::Result<()> {
    match cmd {
        CompareCommand::Match {
            log_a,
            log_b,
            data,
            tolerance,
            out,
        } => {
            let a = PredictionLog::load(&log_a)?;
            let b = PredictionLog::load(&log_b)?;
            let labels = load_labels(&data, a.manifest().num_classes)?;
            let matched = compare::match_epochs(&a, &b, &labels, tolerance)?;
            learnorder::io::atomic_write(&out, |w| {
                use std::io::Write;
                writeln!(w, "extent_a_index,extent_a,extent_b_index,extent_b,accuracy")?;
                for p in &matched.pairs {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        p.extent_a_index, p.extent_a, p.extent_b_index, p.extent_b, p.accuracy
                    )?;
                }
                Ok(())
            })?;
            if !matched.unmatched_b.is_empty() {
                eprintln!("unmatched extents of log B: {:?}", matched.unmatched_b);
            }
        }
        CompareCommand::Overlap {
            log_a,
            log_b,
            data,
            tolerance,
            out,
        } => {
            let a = PredictionLog::load(&log_a)?;
            let b = PredictionLog::load(&log_b)?;
            let labels = load_labels(&data, a.manifest().num_classes)?;
            let matched = compare::match_epochs(&a, &b, &labels, tolerance)?;
            let overlap = compare::overlap_counts(&a, &b, &labels, &matched.pairs)?;
            learnorder::io::atomic_write(&out, |w| {
                use std::io::Write;
                writeln!(
                    w,
                    "extent_a_index,extent_a,extent_b_index,extent_b,accuracy,both,only_a,only_b"
                )?;
                for (p, o) in matched.pairs.iter().zip(&overlap) {
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{},{}",
                        p.extent_a_index,
                        p.extent_a,
                        p.extent_b_index,
                        p.extent_b,
                        p.accuracy,
                        o.both,
                        o.only_a,
                        o.only_b
                    )?;
                }
                Ok(())
            })?;
        }
        CompareCommand::Correlate {
            log_a,
            data_a,
            log_b,
            data_b,
            out,
        } => {
            let a = PredictionLog::load(&log_a)?;
            let b = PredictionLog::load(&log_b)?;
            let labels_a = load_labels(&data_a, a.manifest().num_classes)?;
            let labels_b = load_labels(&data_b, b.manifest().num_classes)?;
            let c = compare::correlate_accessibility(&a, &labels_a, &b, &labels_b)?;
            learnorder::io::atomic_write(&out, |w| {
                use std::io::Write;
                writeln!(w, "name,r,log10_p")?;
                writeln!(w, "accessibility,{},{}", c.r, c.log10_p)?;
                Ok(())
            })?;
            println!("r = {}, log10(p) = {}", c.r, c.log10_p);
        }
        CompareCommand::Binned { x, y, bins, out } => {
            let xs = read_score_csv(&x)?;
            let ys = read_score_csv(&y)?;
            let binned = compare::binned_comparison(&xs, &ys, bins)?;
            compare::write_binned_csv(&binned, &out)?;
        }
    }
    println!("ok");
    Ok(())
}

fn run_exp(cmd: ExpCommand, seed: Option<u64>) -> anyhow::Result<()> {
    fn with_seed<T>(mut config: T, seed: Option<u64>, set: impl Fn(&mut T, u64)) -> T {
        if let Some(s) = seed {
            set(&mut config, s);
        }
        config
    }
    match cmd {
        ExpCommand::Structured(args) => {
            let config = with_seed(
                parse_config::<experiments::StructuredConfig>(&args.config)?,
                seed,
                |c, s| c.seed = s,
            );
            experiments::run_structured(&config, &args.out)?;
        }
        ExpCommand::Gaussian(args) => {
            let config = with_seed(
                parse_config::<experiments::GaussianRunConfig>(&args.config)?,
                seed,
                |c, s| c.seed = s,
            );
            experiments::run_gaussian(&config, &args.out)?;
        }
        ExpCommand::RandomLabels(args) => {
            let config = with_seed(
                parse_config::<experiments::RandomLabelsConfig>(&args.config)?,
                seed,
                |c, s| c.seed = s,
            );
            experiments::run_random_labels(&config, &args.out)?;
        }
        ExpCommand::Gabor(args) => {
            let config = with_seed(
                parse_config::<experiments::GaborRunConfig>(&args.config)?,
                seed,
                |c, s| c.seed = s,
            );
            experiments::run_gabor(&config, &args.out)?;
        }
        ExpCommand::Partitions(args) => {
            let config = with_seed(
                parse_config::<experiments::PartitionsConfig>(&args.config)?,
                seed,
                |c, s| c.seed = s,
            );
            experiments::run_partitions(&config, &args.out)?;
        }
        ExpCommand::Paradigms(args) => {
            let config = with_seed(
                parse_config::<experiments::ParadigmsConfig>(&args.config)?,
                seed,
                |c, s| c.seed = s,
            );
            experiments::run_paradigms(&config, &args.out)?;
        }
        ExpCommand::Oos(args) => {
            let config = with_seed(
                parse_config::<experiments::OutOfSampleConfig>(&args.config)?,
                seed,
                |c, s| c.seed = s,
            );
            experiments::run_out_of_sample(&config, &args.out)?;
        }
    }
    println!("ok");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
