//! Versioned JSON checkpoints. Floats are written in their shortest
//! round-trip form, so a save/load cycle is bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::stacked::{ModelDims, StackedModel};
use super::train::TrainConfig;
use crate::error::{Error, Result};
use crate::labels::ClassCounts;
use crate::scalar::Scalar;

pub const CHECKPOINT_FORMAT: &str = "vwmhqae-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Scalar"))]
pub struct Checkpoint<T = f64> {
    pub format: String,
    pub version: u32,
    /// `f32` or `f64`.
    pub scalar: String,
    pub seed: u64,
    pub train: TrainConfig,
    pub dims: ModelDims,
    pub feature_names: Vec<String>,
    pub head_names: Vec<String>,
    /// Training-split class sizes per head, used for the default F-beta.
    pub train_class_counts: Vec<ClassCounts>,
    pub model: StackedModel<T>,
}

impl<T: Scalar> Checkpoint<T> {
    pub fn new(
        model: StackedModel<T>,
        train: TrainConfig,
        dims: ModelDims,
        feature_names: Vec<String>,
        head_names: Vec<String>,
        train_class_counts: Vec<ClassCounts>,
    ) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            scalar: T::NAME.into(),
            seed: train.seed,
            train,
            dims,
            feature_names,
            head_names,
            train_class_counts,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let head: Header = serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if head.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!("not a checkpoint (format '{}')", head.format)));
        }
        if head.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported checkpoint version {}", head.version)));
        }
        if head.scalar != T::NAME {
            return Err(Error::Checkpoint(format!("checkpoint holds {} values, expected {}", head.scalar, T::NAME)));
        }
        let mut ck: Self = serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        ck.train.seed = ck.seed;
        if ck.model.input_dim() != ck.feature_names.len() || ck.model.n_heads() != ck.head_names.len() {
            return Err(Error::Checkpoint("model dimensions disagree with the recorded names".into()));
        }
        Ok(ck)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
    scalar: String,
}
