//! Train-and-score on a split, shared by `train` and `experiment`.

use crate::data::{Dataset, Split, StandardizationStats};
use crate::error::{Error, Result};
use crate::labels::ClassCounts;
use crate::metrics::{evaluate, BetaPolicy, MetricsReport};
use crate::model::{train_standardized_with_validation, ModelDims, ModelKind, StackedModel, TrainConfig, TrainedModel};
use crate::scalar::Scalar;

/// Fits standardization on the training part, trains, and attaches the
/// standardization to the returned model.
pub fn train_on_split<T: Scalar>(
    kind: ModelKind,
    dims: &ModelDims,
    split: &Split<T>,
    cfg: &TrainConfig,
) -> Result<TrainedModel<T>> {
    let stats = StandardizationStats::fit(&split.train.features)?;
    let x = stats.apply(&split.train.features)?;
    let val_x = if cfg.early_stop_on_validation && split.val.n_samples() > 0 {
        Some(stats.apply(&split.val.features)?)
    } else {
        None
    };
    let validation = val_x.as_ref().map(|v| (v, &split.val.labels));
    let mut trained = train_standardized_with_validation(kind, dims, &x, &split.train.labels, validation, cfg)?;
    trained.model.standardization = stats;
    Ok(trained)
}

/// Scores `model` on raw-feature data. A width mismatch names the width
/// the model expects.
pub fn evaluate_model<T: Scalar>(
    model: &StackedModel<T>,
    data: &Dataset<T>,
    policy: BetaPolicy,
    train_counts: &[ClassCounts],
) -> Result<MetricsReport> {
    if data.n_features() != model.input_dim() {
        return Err(Error::shape(
            "evaluate",
            format!("{} feature columns as in the checkpoint", model.input_dim()),
            format!("{} columns", data.n_features()),
        ));
    }
    if data.n_heads() != model.n_heads() {
        return Err(Error::shape(
            "evaluate",
            format!("{} heads as in the checkpoint", model.n_heads()),
            format!("{} heads", data.n_heads()),
        ));
    }
    let pred = model.predict_raw(&data.features)?;
    evaluate(&pred.labels, &data.labels, &data.head_names, policy, train_counts)
}
