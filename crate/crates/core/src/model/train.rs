use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::loss::smooth_l1;
use super::network::{init_network, NetworkParams};
use crate::metrics::{Feature, FeatureMatrix, FeatureVector, MinMaxScaler};
use crate::{Error, Result};

/// Which rows the min-max ranges are fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormFit {
    #[default]
    Train,
    Full,
}

impl FromStr for NormFit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Self::Train),
            "full" => Ok(Self::Full),
            other => Err(Error::Config(format!("unknown norm fit {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub smooth_l1_beta: f64,
    pub split_ratio: f64,
    pub seed: u64,
    pub features: Vec<Feature>,
    pub hidden_width: usize,
    /// Number of weight matrices, hidden layers plus the output layer.
    pub weight_layers: usize,
    pub norm_fit: NormFit,
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 3500,
            learning_rate: 0.001,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            smooth_l1_beta: 1.0,
            split_ratio: 0.7,
            seed: 42,
            features: Feature::ALL.to_vec(),
            hidden_width: 32,
            weight_layers: 9,
            norm_fit: NormFit::Train,
            threshold: 0.5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_owned()));
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return fail("learning rate must be positive");
        }
        if self.split_ratio.is_nan() || self.split_ratio <= 0.0 || self.split_ratio >= 1.0 {
            return fail("split ratio must lie strictly between 0 and 1");
        }
        if self.smooth_l1_beta.is_nan() || self.smooth_l1_beta <= 0.0 {
            return fail("smooth L1 beta must be positive");
        }
        if self.features.is_empty() {
            return fail("feature list is empty");
        }
        if self.hidden_width == 0 || self.weight_layers == 0 {
            return fail("network needs at least one layer of nonzero width");
        }
        let mut sorted = self.features.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.features.len() {
            return fail("feature list contains duplicates");
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.features.len()];
        sizes.extend(std::iter::repeat_n(self.hidden_width, self.weight_layers - 1));
        sizes.push(1);
        sizes
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
        }
    }
}

/// Seeded shuffle split: `round(N * ratio)` rows for training (at least one
/// row on each side), the rest for testing.
pub fn split_dataset(matrix: &FeatureMatrix, ratio: f64, seed: u64) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let positives = matrix.rows.iter().filter(|r| r.defective).count();
    let negatives = matrix.len() - positives;
    if positives < 2 || negatives < 2 {
        return Err(Error::TooFewRows { positives, negatives });
    }
    let n = matrix.len();
    let n_train = ((n as f64 * ratio).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |idx: &[usize]| FeatureMatrix::new(idx.iter().map(|&i| matrix.rows[i].clone()).collect());
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}

/// Randomly drops majority-class rows until both classes are the same size.
/// Surviving rows keep their original order.
pub fn undersample(train: &FeatureMatrix, seed: u64) -> Result<FeatureMatrix> {
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..train.len()).partition(|&i| train.rows[i].defective);
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass);
    }
    let (minority, majority) = if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep: Vec<usize> = index::sample(&mut rng, majority.len(), minority.len())
        .into_iter()
        .map(|k| majority[k])
        .chain(minority)
        .collect();
    keep.sort_unstable();
    Ok(FeatureMatrix::new(keep.into_iter().map(|i| train.rows[i].clone()).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub mean_loss: f64,
    pub confusion: Confusion,
    pub threshold: f64,
}

/// Confusion matrix and scores for probabilities against 0/1 labels.
/// Predictions at or above `threshold` count as defective.
pub fn evaluate_predictions(preds: &[f64], labels: &[bool], threshold: f64, beta: f64) -> EvalMetrics {
    let mut c = Confusion::default();
    let mut loss = 0.0;
    for (&p, &label) in preds.iter().zip(labels) {
        match (p >= threshold, label) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
        loss += smooth_l1(p - f64::from(u8::from(label)), beta);
    }
    let ratio = |num: usize, den: usize| if den > 0 { num as f64 / den as f64 } else { 0.0 };
    let recall = ratio(c.tp, c.tp + c.fn_);
    let precision = ratio(c.tp, c.tp + c.fp);
    let f1 = if recall + precision > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    EvalMetrics {
        recall,
        precision,
        f1,
        mean_loss: loss / preds.len().max(1) as f64,
        confusion: c,
        threshold,
    }
}

/// Network plus the preprocessing needed to score raw dataset rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub layer_sizes: Vec<usize>,
    pub features: Vec<Feature>,
    pub scaler: MinMaxScaler,
    pub params: NetworkParams,
    pub config: TrainConfig,
}

impl TrainedModel {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.params.layer_sizes != self.layer_sizes || self.params.input_width() != self.features.len() {
            return Err(Error::BadShape("model features do not match the network input".into()));
        }
        Ok(())
    }

    pub fn predict(&self, row: &FeatureVector) -> Result<f64> {
        self.params.forward(&self.scaler.apply_row(row).features(&self.features))
    }

    pub fn evaluate(&self, test: &FeatureMatrix, threshold: f64) -> Result<EvalMetrics> {
        if test.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let preds = test.rows.iter().map(|r| self.predict(r)).collect::<Result<Vec<_>>>()?;
        let labels: Vec<bool> = test.rows.iter().map(|r| r.defective).collect();
        Ok(evaluate_predictions(&preds, &labels, threshold, self.config.smooth_l1_beta))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: TrainedModel,
    /// Training loss before each epoch's update.
    pub loss_history: Vec<f64>,
    pub train_rows: usize,
    pub balanced_rows: usize,
    /// Held-out rows, unnormalized.
    pub test: FeatureMatrix,
    pub test_metrics: EvalMetrics,
}

/// Split, normalize, undersample, then full-batch Adam for `epochs`.
/// Every random choice derives from `config.seed`.
pub fn train(matrix: &FeatureMatrix, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let (train_part, test) = split_dataset(matrix, config.split_ratio, config.seed)?;
    let scaler = match config.norm_fit {
        NormFit::Train => MinMaxScaler::fit(&train_part, &config.features)?,
        NormFit::Full => MinMaxScaler::fit(matrix, &config.features)?,
    };
    let balanced = undersample(&scaler.apply(&train_part), config.seed.wrapping_add(1))?;
    let xs: Vec<Vec<f64>> = balanced.rows.iter().map(|r| r.features(&config.features)).collect();
    let ys: Vec<f64> = balanced.rows.iter().map(|r| f64::from(u8::from(r.defective))).collect();

    let layer_sizes = config.layer_sizes();
    let mut params = init_network(&layer_sizes, config.seed.wrapping_add(2))?;
    let mut state = AdamState::new(&params);
    let adam = config.adam();
    let mut loss_history = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let (loss, grads) = params.gradients(&xs, &ys, config.smooth_l1_beta)?;
        loss_history.push(loss);
        adam_step(&mut params, &mut state, &grads, &adam)?;
    }

    let model = TrainedModel {
        layer_sizes,
        features: config.features.clone(),
        scaler,
        params,
        config: config.clone(),
    };
    let test_metrics = model.evaluate(&test, config.threshold)?;
    Ok(TrainOutcome {
        model,
        loss_history,
        train_rows: train_part.len(),
        balanced_rows: balanced.len(),
        test,
        test_metrics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    /// Feature left out, `None` for the full set.
    pub removed: Option<Feature>,
    pub features: Vec<Feature>,
    pub recall: f64,
    pub mean_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
}

/// Trains on the full feature set and on every leave-one-out subset with the
/// same seed, sorted by test recall (descending, stable).
pub fn ablate(matrix: &FeatureMatrix, base_features: &[Feature], config: &TrainConfig) -> Result<AblationReport> {
    if base_features.len() < 2 {
        return Err(Error::Config("ablation needs at least two features".into()));
    }
    let mut subsets: Vec<(Option<Feature>, Vec<Feature>)> = vec![(None, base_features.to_vec())];
    for &removed in base_features {
        subsets.push((Some(removed), base_features.iter().copied().filter(|&f| f != removed).collect()));
    }
    let results: Vec<Result<AblationRow>> = subsets
        .into_par_iter()
        .map(|(removed, features)| {
            let cfg = TrainConfig {
                features: features.clone(),
                ..config.clone()
            };
            let outcome = train(matrix, &cfg)?;
            Ok(AblationRow {
                removed,
                features,
                recall: outcome.test_metrics.recall,
                mean_loss: outcome.test_metrics.mean_loss,
            })
        })
        .collect();
    let mut rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| b.recall.total_cmp(&a.recall));
    Ok(AblationReport { rows })
}
