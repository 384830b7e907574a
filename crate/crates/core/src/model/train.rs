//! Minibatch Adam training loop shared by every trainable component.

use serde::{Deserialize, Serialize};

use crate::adam::{Adam, AdamConfig};
use crate::error::{Error, Result};
use crate::losses::LossCombiner;
use crate::rng::Rng;
use crate::scalar::Scalar;

/// How class imbalance is handled before and during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Imbalance {
    WeightedClass,
    Smote,
    None,
}

impl Imbalance {
    pub fn as_str(self) -> &'static str {
        match self {
            Imbalance::WeightedClass => "weighted_class",
            Imbalance::Smote => "smote",
            Imbalance::None => "none",
        }
    }

    /// Table label: `WEIGHTED CLASS`, `SMOTE`, `NONE`.
    pub fn display_name(self) -> &'static str {
        match self {
            Imbalance::WeightedClass => "WEIGHTED CLASS",
            Imbalance::Smote => "SMOTE",
            Imbalance::None => "NONE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub early_stop_min_delta: f64,
    pub patience: usize,
    pub max_epochs: usize,
    /// Set from the run seed, never read from config files.
    #[serde(skip)]
    pub seed: u64,
    pub loss_combiner: LossCombiner,
    pub imbalance: Imbalance,
    /// Neighbourhood size when `imbalance = smote`.
    pub smote_k: usize,
    /// Train the final classifier with class weights.
    pub classifier_weighted: bool,
    /// Stop once the monitored loss plateaus; off runs all `max_epochs`.
    pub early_stopping: bool,
    /// Monitor the validation loss instead of the training loss.
    pub early_stop_on_validation: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 512,
            early_stop_min_delta: 1e-5,
            patience: 10,
            max_epochs: 500,
            seed: 0,
            loss_combiner: LossCombiner::VarianceWeighted,
            imbalance: Imbalance::WeightedClass,
            smote_k: crate::smote::DEFAULT_K,
            classifier_weighted: true,
            early_stopping: true,
            early_stop_on_validation: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if !(self.early_stop_min_delta >= 0.0) {
            return Err(Error::Config("early-stop min delta must be non-negative".into()));
        }
        if self.patience == 0 {
            return Err(Error::Config("patience must be positive".into()));
        }
        if self.smote_k == 0 {
            return Err(Error::Config("smote_k must be positive".into()));
        }
        self.loss_combiner.validate()
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig::with_learning_rate(self.learning_rate)
    }
}

/// Loss components reported per epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub total: f64,
    pub j_x: Option<f64>,
    pub j_y: Option<f64>,
    pub sigma1_sq: Option<f64>,
    pub sigma2_sq: Option<f64>,
}

impl LossRecord {
    pub fn only(total: f64) -> Self {
        Self {
            total,
            j_x: None,
            j_y: None,
            sigma1_sq: None,
            sigma2_sq: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Cumulative optimizer steps at the end of this epoch.
    pub updates: usize,
    pub loss: LossRecord,
}

/// Per-epoch losses of one training stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub stage: String,
    pub epochs: Vec<EpochRecord>,
}

impl History {
    pub fn new(stage: impl Into<String>) -> Self {
        Self {
            stage: stage.into(),
            epochs: Vec::new(),
        }
    }

    pub fn totals(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.loss.total).collect()
    }

    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }
}

/// A differentiable training objective over a fixed dataset.
pub trait Objective<T: Scalar> {
    type Model;

    fn n_rows(&self) -> usize;

    /// Parameter tensors in a fixed order shared with [`Objective::batch`].
    fn params_mut<'a>(&self, model: &'a mut Self::Model) -> Vec<&'a mut [T]>;

    /// Loss on the given rows plus one gradient vector per parameter tensor.
    fn batch(&self, model: &Self::Model, rows: &[usize]) -> Result<(T, Vec<Vec<T>>)>;

    /// Loss breakdown over every row, used for history and early stopping.
    fn evaluate(&self, model: &Self::Model) -> Result<LossRecord>;
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub min_delta: f64,
    pub patience: usize,
    pub adam: AdamConfig,
    /// Stop early on plateau; off for fixed-budget runs.
    pub early_stopping: bool,
}

impl From<&TrainConfig> for FitOptions {
    fn from(c: &TrainConfig) -> Self {
        Self {
            max_epochs: c.max_epochs,
            batch_size: c.batch_size,
            min_delta: c.early_stop_min_delta,
            patience: c.patience,
            adam: c.adam(),
            early_stopping: c.early_stopping,
        }
    }
}

fn all_finite<T: Scalar>(v: &[Vec<T>]) -> bool {
    v.iter().flatten().all(|x| x.is_finite())
}

/// Runs shuffled minibatch Adam until `max_epochs` or until the monitored
/// loss fails to improve on its best value by more than `min_delta` for
/// `patience` consecutive epochs. The monitored loss is the full training
/// loss, or the loss of `monitor` when given.
pub fn fit<T, O>(
    objective: &O,
    monitor: Option<&O>,
    model: &mut O::Model,
    opts: &FitOptions,
    rng: &mut Rng,
    stage: &str,
) -> Result<History>
where
    T: Scalar,
    O: Objective<T>,
{
    let mut history = History::new(stage);
    if opts.max_epochs == 0 {
        return Ok(history);
    }
    let n = objective.n_rows();
    if n == 0 {
        return Err(Error::InsufficientData(format!("{stage}: no training rows")));
    }
    let batch = opts.batch_size.clamp(1, n);
    let sizes: Vec<usize> = objective.params_mut(model).iter().map(|p| p.len()).collect();
    let mut adam = Adam::new(&sizes, opts.adam);
    let mut best = f64::INFINITY;
    let mut stale = 0;
    let mut updates = 0;
    for epoch in 1..=opts.max_epochs {
        let order = rng.permutation(n);
        for (b, rows) in order.chunks(batch).enumerate() {
            let (loss, grads) = objective.batch(model, rows)?;
            if !loss.is_finite() || !all_finite(&grads) {
                return Err(Error::Divergence {
                    epoch,
                    batch: b,
                    detail: format!("{stage}: loss {loss}"),
                });
            }
            adam.step(objective.params_mut(model), &grads)?;
            updates += 1;
        }
        let record = objective.evaluate(model)?;
        if !record.total.is_finite() {
            return Err(Error::Divergence {
                epoch,
                batch: n.div_ceil(batch),
                detail: format!("{stage}: epoch loss {}", record.total),
            });
        }
        history.epochs.push(EpochRecord {
            epoch,
            updates,
            loss: record,
        });
        if opts.early_stopping {
            let watched = match monitor {
                Some(m) => m.evaluate(model)?.total,
                None => record.total,
            };
            if watched < best - opts.min_delta {
                best = watched;
                stale = 0;
            } else {
                stale += 1;
                if stale >= opts.patience {
                    break;
                }
            }
        }
    }
    Ok(history)
}
