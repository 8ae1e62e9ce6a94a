//! Multi-class AdaBoost (SAMME) over linear weak learners.
//!
//! Each round fits a single-layer softmax classifier to the current
//! example weights by minimizing weight-scaled cross-entropy with SGD,
//! then reweights: alpha = ln((1 - eps) / eps) + ln(K - 1) and
//! w <- w * exp(alpha * [mistake]), renormalized. Weight-scaling the
//! loss instead of resampling keeps every round deterministic.
//! Prediction snapshots accumulate alpha-weighted votes, playing the
//! role that epoch snapshots play for SGD learners.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax_low, check_train_and_eval, log_manifest, Classifier};
use crate::datasets::LabeledDataset;
use crate::predlog::PredictionLog;
use crate::{Error, Result};

/// Smallest admissible weighted error; a perfect round is clamped here
/// so its alpha stays finite.
const EPSILON_FLOOR: f64 = 1e-10;
/// Fresh weak-learner seeds tried before giving up on a round.
const MAX_RETRIES: u32 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    /// Maximum number of weak learners (boosting rounds).
    pub num_weak: usize,
    /// SGD epochs used to fit each weak learner.
    pub weak_epochs: usize,
    pub weak_lr: f64,
    #[serde(default = "default_weak_batch_size")]
    pub weak_batch_size: usize,
    /// Weak-learner counts at which ensemble predictions are logged;
    /// plays the role of the epoch schedule.
    pub snapshot_schedule: Vec<u64>,
    pub seed: u64,
}

fn default_weak_batch_size() -> usize {
    100
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_weak == 0 || self.weak_epochs == 0 {
            return Err(Error::InvalidConfig(
                "num_weak and weak_epochs must be >= 1".into(),
            ));
        }
        if !(self.weak_lr > 0.0 && self.weak_lr.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "weak_lr must be positive, got {}",
                self.weak_lr
            )));
        }
        if self.weak_batch_size == 0 {
            return Err(Error::InvalidConfig("weak_batch_size must be >= 1".into()));
        }
        if self.snapshot_schedule.is_empty()
            || !self.snapshot_schedule.windows(2).all(|w| w[0] < w[1])
        {
            return Err(Error::InvalidConfig(
                "snapshot_schedule must be non-empty and strictly increasing".into(),
            ));
        }
        if self.snapshot_schedule[0] == 0
            || *self.snapshot_schedule.last().unwrap() > self.num_weak as u64
        {
            return Err(Error::InvalidConfig(
                "snapshots must lie in [1, num_weak]".into(),
            ));
        }
        Ok(())
    }
}

/// The SAMME round weight for weighted error `epsilon` and `K` classes.
pub fn samme_alpha(epsilon: f64, num_classes: u16) -> f64 {
    ((1.0 - epsilon) / epsilon).ln() + (num_classes as f64 - 1.0).ln()
}

/// A single-layer softmax classifier.
#[derive(Debug, Clone)]
struct LinearWeak {
    weights: Array2<f64>,
    bias: Array1<f64>,
}

impl LinearWeak {
    fn predict_batch(&self, x: ArrayView2<f64>) -> Vec<u16> {
        let mut out = Vec::with_capacity(x.nrows());
        for chunk in x.axis_chunks_iter(Axis(0), 2048) {
            let logits = chunk.dot(&self.weights) + &self.bias;
            for row in logits.rows() {
                out.push(argmax_low(row.as_slice().expect("row-major logits")));
            }
        }
        out
    }
}

/// The boosted ensemble: alpha-weighted plurality over the accepted
/// weak learners.
#[derive(Debug, Clone)]
pub struct BoostModel {
    weaks: Vec<LinearWeak>,
    alphas: Vec<f64>,
    num_classes: u16,
}

impl BoostModel {
    pub fn num_rounds(&self) -> usize {
        self.weaks.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }
}

impl Classifier for BoostModel {
    fn input_dim(&self) -> usize {
        self.weaks[0].weights.nrows()
    }

    fn num_classes(&self) -> u16 {
        self.num_classes
    }

    fn class_scores(&self, features: &[f64]) -> Vec<f64> {
        let x = ArrayView2::from_shape((1, features.len()), features).unwrap();
        let mut scores = vec![0.0; self.num_classes as usize];
        for (weak, &alpha) in self.weaks.iter().zip(&self.alphas) {
            let p = weak.predict_batch(x)[0];
            scores[p as usize] += alpha;
        }
        scores
    }
}

/// Diagnostics of one accepted boosting round.
#[derive(Debug, Clone, Serialize)]
pub struct BoostRound {
    /// 1-based round number.
    pub round: usize,
    pub epsilon: f64,
    pub alpha: f64,
    /// Fresh weak-learner seeds consumed before this round was accepted.
    pub retries: u32,
    /// |sum(w) - 1| measured after renormalization.
    pub weight_sum_error: f64,
    pub min_weight: f64,
}

/// Everything a boosting run produces: logs ordered
/// `[train, eval_sets...]`, the final model, and per-round diagnostics.
/// If training stopped early the logs carry a truncated schedule.
#[derive(Debug)]
pub struct BoostRun {
    pub logs: Vec<PredictionLog>,
    pub model: BoostModel,
    pub rounds: Vec<BoostRound>,
}

/// Fit a weak learner to the weighted training set. Gradients are the
/// weight-scaled cross-entropy gradients, normalized by the weight mass
/// of each mini-batch.
fn train_weak(
    train: &LabeledDataset,
    example_weights: &[f64],
    config: &BoostConfig,
    round: usize,
    rng: &mut ChaCha8Rng,
) -> Result<LinearWeak> {
    let d = train.dim();
    let k = train.num_classes as usize;
    let limit = (6.0 / (d + k) as f64).sqrt();
    let mut weights = Array2::zeros((d, k));
    for v in weights.iter_mut() {
        *v = rng.gen_range(-limit..=limit);
    }
    let mut bias = Array1::zeros(k);

    let m = train.len();
    let mut order: Vec<usize> = (0..m).collect();
    for epoch in 1..=config.weak_epochs {
        order.shuffle(rng);
        for batch in order.chunks(config.weak_batch_size) {
            let mass: f64 = batch.iter().map(|&j| example_weights[j]).sum();
            if mass <= 0.0 {
                continue;
            }
            let xb = train.features.select(Axis(0), batch);
            let mut dlogits = xb.dot(&weights) + &bias;
            let mut loss = 0.0;
            for (&j, mut row) in batch.iter().zip(dlogits.rows_mut()) {
                let y = train.labels[j] as usize;
                let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut sum = 0.0;
                for v in row.iter_mut() {
                    *v = (*v - max).exp();
                    sum += *v;
                }
                let scale = example_weights[j] / mass;
                loss += scale * (sum.ln() - row[y].ln());
                let inv = scale / sum;
                for v in row.iter_mut() {
                    *v *= inv;
                }
                row[y] -= scale;
            }
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    model_index: round,
                    epoch: epoch as u64,
                });
            }
            let dw = xb.t().dot(&dlogits);
            let db = dlogits.sum_axis(Axis(0));
            weights.scaled_add(-config.weak_lr, &dw);
            bias.scaled_add(-config.weak_lr, &db);
        }
    }
    Ok(LinearWeak { weights, bias })
}

/// Run SAMME on `train`, logging alpha-weighted ensemble votes on the
/// training set and each eval set at every snapshot count. Rounds whose
/// weighted error reaches the chance bound (K - 1) / K are discarded and
/// retried with a fresh substream; after `MAX_RETRIES` failures the run
/// stops early and the schedule is truncated to the rounds achieved.
pub fn train_adaboost(
    train: &LabeledDataset,
    eval_sets: &[&LabeledDataset],
    config: &BoostConfig,
) -> Result<BoostRun> {
    config.validate()?;
    check_train_and_eval(train, eval_sets)?;
    let k = train.num_classes;
    let m = train.len();
    let chance_bound = (k as f64 - 1.0) / k as f64;

    let mut sets: Vec<&LabeledDataset> = Vec::with_capacity(1 + eval_sets.len());
    sets.push(train);
    sets.extend_from_slice(eval_sets);

    let mut example_weights = vec![1.0 / m as f64; m];
    let mut scores: Vec<Array2<f64>> = sets
        .iter()
        .map(|s| Array2::zeros((s.len(), k as usize)))
        .collect();
    let mut snapshots: Vec<Vec<Vec<u16>>> = Vec::new(); // [snapshot][set]
    let mut model = BoostModel {
        weaks: Vec::new(),
        alphas: Vec::new(),
        num_classes: k,
    };
    let mut rounds: Vec<BoostRound> = Vec::new();
    let mut next_snapshot = 0usize;

    'boosting: for round in 1..=config.num_weak {
        let mut accepted = None;
        for retry in 0..=MAX_RETRIES {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(((round as u64) << 3) | retry as u64);
            let weak = train_weak(train, &example_weights, config, round, &mut rng)?;
            let train_preds = weak.predict_batch(train.features.view());
            let epsilon: f64 = train_preds
                .iter()
                .zip(&train.labels)
                .zip(&example_weights)
                .filter(|((p, y), _)| p != y)
                .map(|(_, &w)| w)
                .sum();
            if epsilon < chance_bound {
                accepted = Some((weak, train_preds, epsilon, retry));
                break;
            }
        }
        let Some((weak, train_preds, epsilon, retries)) = accepted else {
            break 'boosting; // no weak learner beats chance; keep what we have
        };

        let alpha = samme_alpha(epsilon.max(EPSILON_FLOOR), k);
        for ((p, y), w) in train_preds
            .iter()
            .zip(&train.labels)
            .zip(example_weights.iter_mut())
        {
            if p != y {
                *w *= alpha.exp();
            }
        }
        let total: f64 = example_weights.iter().sum();
        for w in example_weights.iter_mut() {
            *w /= total;
        }
        let check_sum: f64 = example_weights.iter().sum();
        let min_weight = example_weights.iter().copied().fold(f64::INFINITY, f64::min);
        rounds.push(BoostRound {
            round,
            epsilon,
            alpha,
            retries,
            weight_sum_error: (check_sum - 1.0).abs(),
            min_weight,
        });

        for (s, set) in sets.iter().enumerate() {
            let preds = if s == 0 {
                train_preds.clone()
            } else {
                weak.predict_batch(set.features.view())
            };
            for (j, &p) in preds.iter().enumerate() {
                scores[s][[j, p as usize]] += alpha;
            }
        }
        model.weaks.push(weak);
        model.alphas.push(alpha);

        if next_snapshot < config.snapshot_schedule.len()
            && config.snapshot_schedule[next_snapshot] == round as u64
        {
            let rows = scores
                .iter()
                .map(|s| {
                    s.rows()
                        .into_iter()
                        .map(|r| argmax_low(r.as_slice().expect("row-major scores")))
                        .collect::<Vec<u16>>()
                })
                .collect::<Vec<_>>();
            snapshots.push(rows);
            next_snapshot += 1;
        }
    }

    let schedule: Vec<u64> = config.snapshot_schedule[..next_snapshot].to_vec();
    if schedule.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "boosting stopped after {} rounds, before the first snapshot",
            model.num_rounds()
        )));
    }
    let tag = serde_json::json!({
        "kind": "adaboost-samme",
        "config": config,
    })
    .to_string();
    let mut logs = Vec::with_capacity(sets.len());
    for (s, set) in sets.iter().enumerate() {
        let manifest = log_manifest(set, train, &schedule, 1, tag.clone(), config.seed);
        let mut log = PredictionLog::new(manifest)?;
        for (t, rows) in snapshots.iter().enumerate() {
            log.record_row(t, 0, &rows[s])?;
        }
        logs.push(log);
    }
    Ok(BoostRun {
        logs,
        model,
        rounds,
    })
}
