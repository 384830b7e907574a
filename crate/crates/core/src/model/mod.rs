//! Quality-driven autoencoder layers, greedy stacking, classifiers,
//! baselines, parameter accounting and checkpoints.

mod checkpoint;
mod headnet;
mod params;
mod qae;
mod stacked;
mod train;

pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use headnet::{train_classifier, train_head_net, train_head_net_monitored, HeadNet, NN_HIDDEN};
pub use params::{count_parameters, LayerParams, ParamCount};
pub use qae::{train_qae_layer, train_qae_layer_monitored, LayerLoss, QaeLayer, QaeLayerSpec, QaeOutput};
pub use stacked::{
    layer_stream, prepare_imbalance, stack_train, train_baseline, train_model, train_standardized,
    train_standardized_with_validation, ClassifierKind,
    EncoderKind, ModelDims, ModelKind, Prediction, StackedModel, TrainedModel, CLASSIFIER_STREAM, SMOTE_STREAM,
};
pub use train::{fit, EpochRecord, FitOptions, History, Imbalance, LossRecord, Objective, TrainConfig};
