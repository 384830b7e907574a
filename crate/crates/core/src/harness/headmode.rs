//! Multi-headed outputs versus the measurement step as a categorical input.
//!
//! Variant A flattens the data to one row per observed `(sample, head)`
//! with the head one-hot encoded among the inputs and a single binary
//! target. Variant B keeps one output head per step. Both are a single
//! variance-weighted QAE layer of the same width, trained for the same
//! number of gradient updates.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, StandardizationStats};
use crate::error::{Error, Result};
use crate::heads::head_units;
use crate::losses::LossCombiner;
use crate::model::{layer_stream, prepare_imbalance, train_qae_layer, History, LayerLoss, QaeLayerSpec, TrainConfig};
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeadmodeConfig {
    /// Epoch budget of the multi-headed variant.
    pub epochs: usize,
    /// Epoch of the multi-headed run whose loss is the reference level.
    pub reference_epoch: usize,
    /// Seeds to run; empty means the run seed alone.
    pub seeds: Vec<u64>,
}

impl Default for HeadmodeConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            reference_epoch: 50,
            seeds: Vec::new(),
        }
    }
}

impl HeadmodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reference_epoch == 0 || self.reference_epoch > self.epochs {
            return Err(Error::Config(format!(
                "reference epoch {} must lie in 1..={}",
                self.reference_epoch, self.epochs
            )));
        }
        Ok(())
    }

    pub fn seeds_or(&self, run_seed: u64) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![run_seed]
        } else {
            self.seeds.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reach {
    pub epoch: usize,
    pub updates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadmodeResult {
    pub seed: u64,
    /// A: categorical input, single head.
    pub categorical: History,
    /// B: multi-headed.
    pub multihead: History,
    pub reference_loss: f64,
    pub categorical_reach: Option<Reach>,
    pub multihead_reach: Option<Reach>,
}

impl HeadmodeResult {
    /// True when B reaches the reference in strictly fewer updates than A
    /// (A never reaching it counts as slower).
    pub fn multihead_faster(&self) -> bool {
        match (&self.multihead_reach, &self.categorical_reach) {
            (Some(b), Some(a)) => b.updates < a.updates,
            (Some(_), None) => true,
            _ => false,
        }
    }
}

fn first_reach(h: &History, level: f64) -> Option<Reach> {
    h.epochs.iter().find(|e| e.loss.total <= level).map(|e| Reach {
        epoch: e.epoch,
        updates: e.updates,
    })
}

/// Runs both variants on `train` (raw features) with one seed.
pub fn headmode_compare<T: Scalar>(
    train: &Dataset<T>,
    hidden_dim: usize,
    cfg: &TrainConfig,
    hm: &HeadmodeConfig,
) -> Result<HeadmodeResult> {
    hm.validate()?;
    let mut cfg = cfg.clone();
    cfg.loss_combiner = LossCombiner::VarianceWeighted;
    cfg.early_stopping = false;
    let loss = LayerLoss::Quality(LossCombiner::VarianceWeighted);
    let rng = Rng::new(cfg.seed);

    let run = |ds: &Dataset<T>, epochs: usize| -> Result<History> {
        let stats = StandardizationStats::fit(&ds.features)?;
        let x = stats.apply(&ds.features)?;
        let (x, labels, weights, _) = prepare_imbalance(&x, &ds.labels, &cfg, &rng)?;
        let spec = QaeLayerSpec::new(x.cols(), hidden_dim, head_units(labels.n_heads()))?;
        let c = TrainConfig {
            max_epochs: epochs,
            ..cfg.clone()
        };
        let (_, hist) = train_qae_layer(&x, &labels, &weights, &spec, loss, &c, &mut rng.derive(layer_stream(0)))?;
        Ok(hist)
    };

    let multihead = run(train, hm.epochs)?;
    let budget = multihead.epochs.last().map_or(0, |e| e.updates);
    let flat = train.flatten_heads()?;
    let per_epoch = flat.n_samples().div_ceil(cfg.batch_size.clamp(1, flat.n_samples().max(1)));
    let categorical = run(&flat, budget.div_ceil(per_epoch.max(1)))?;

    let reference_loss = multihead
        .epochs
        .get(hm.reference_epoch - 1)
        .or(multihead.epochs.last())
        .map(|e| e.loss.total)
        .ok_or_else(|| Error::InsufficientData("multi-headed run recorded no epochs".into()))?;
    Ok(HeadmodeResult {
        seed: cfg.seed,
        categorical_reach: first_reach(&categorical, reference_loss),
        multihead_reach: first_reach(&multihead, reference_loss),
        categorical,
        multihead,
        reference_loss,
    })
}
