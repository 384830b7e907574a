use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::headnet::{train_head_net_monitored, HeadNet, NN_HIDDEN};
use super::qae::{train_qae_layer_monitored, LayerLoss, QaeLayer, QaeLayerSpec};
use super::train::{History, Imbalance, TrainConfig};
use crate::data::StandardizationStats;
use crate::error::{Error, Result};
use crate::heads::{hard_labels, head_units};
use crate::labels::{class_weights, ClassWeights, HeadLabels};
use crate::matrix::Matrix;
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::smote::oversample_heads;

/// Stream ids derived from the run seed.
pub const SMOTE_STREAM: u64 = 0;
pub const CLASSIFIER_STREAM: u64 = 64;

pub fn layer_stream(k: usize) -> u64 {
    1 + k as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EncoderKind {
    None,
    Autoencoder,
    Quality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassifierKind {
    Logistic,
    Network,
}

/// One of `LR`, `NN`, `AE+LR`, `SAE+LR`, `QAE+LR`, `SQAE+LR` and the `+NN`
/// variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ModelKind {
    pub encoder: EncoderKind,
    pub stacked: bool,
    pub classifier: ClassifierKind,
}

impl ModelKind {
    pub const LR: Self = Self::new(EncoderKind::None, false, ClassifierKind::Logistic);
    pub const NN: Self = Self::new(EncoderKind::None, false, ClassifierKind::Network);
    pub const QAE_LR: Self = Self::new(EncoderKind::Quality, false, ClassifierKind::Logistic);
    pub const QAE_NN: Self = Self::new(EncoderKind::Quality, false, ClassifierKind::Network);
    pub const SQAE_LR: Self = Self::new(EncoderKind::Quality, true, ClassifierKind::Logistic);
    pub const SQAE_NN: Self = Self::new(EncoderKind::Quality, true, ClassifierKind::Network);
    pub const SAE_LR: Self = Self::new(EncoderKind::Autoencoder, true, ClassifierKind::Logistic);

    pub const fn new(encoder: EncoderKind, stacked: bool, classifier: ClassifierKind) -> Self {
        let stacked = stacked && !matches!(encoder, EncoderKind::None);
        Self {
            encoder,
            stacked,
            classifier,
        }
    }

    /// The default comparison grid.
    pub const DEFAULT_GRID: [Self; 6] = [Self::LR, Self::NN, Self::QAE_LR, Self::QAE_NN, Self::SQAE_LR, Self::SQAE_NN];

    pub fn uses_labels_in_encoder(&self) -> bool {
        self.encoder == EncoderKind::Quality
    }

    /// Whether the loss combiner affects this kind.
    pub fn uses_combiner(&self) -> bool {
        self.uses_labels_in_encoder()
    }

    pub fn encoder_widths(&self, hidden: &[usize]) -> Vec<usize> {
        match (self.encoder, self.stacked) {
            (EncoderKind::None, _) => Vec::new(),
            (_, true) => hidden.to_vec(),
            (_, false) => hidden.last().map(|&h| vec![h]).unwrap_or_default(),
        }
    }

    pub fn classifier_hidden<'a>(&self, nn_hidden: &'a [usize]) -> &'a [usize] {
        match self.classifier {
            ClassifierKind::Logistic => &[],
            ClassifierKind::Network => nn_hidden,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let enc = match (self.encoder, self.stacked) {
            (EncoderKind::None, _) => "",
            (EncoderKind::Autoencoder, false) => "AE+",
            (EncoderKind::Autoencoder, true) => "SAE+",
            (EncoderKind::Quality, false) => "QAE+",
            (EncoderKind::Quality, true) => "SQAE+",
        };
        let cls = match self.classifier {
            ClassifierKind::Logistic => "LR",
            ClassifierKind::Network => "NN",
        };
        write!(f, "{enc}{cls}")
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        let (enc, cls) = match up.split_once('+') {
            Some((e, c)) => (Some(e), c),
            None => (None, up.as_str()),
        };
        let classifier = match cls {
            "LR" => ClassifierKind::Logistic,
            "NN" => ClassifierKind::Network,
            _ => return Err(Error::Config(format!("unknown model kind '{s}'"))),
        };
        let (encoder, stacked) = match enc {
            None => (EncoderKind::None, false),
            Some("AE") => (EncoderKind::Autoencoder, false),
            Some("SAE") => (EncoderKind::Autoencoder, true),
            Some("QAE") => (EncoderKind::Quality, false),
            Some("SQAE") => (EncoderKind::Quality, true),
            Some(_) => return Err(Error::Config(format!("unknown model kind '{s}'"))),
        };
        Ok(Self::new(encoder, stacked, classifier))
    }
}

impl TryFrom<String> for ModelKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ModelKind> for String {
    fn from(k: ModelKind) -> String {
        k.to_string()
    }
}

/// Layer widths shared by every model kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelDims {
    /// Stacked encoder widths; single-layer kinds use the last entry.
    pub hidden: Vec<usize>,
    /// Hidden widths of the `NN` classifier.
    pub nn_hidden: Vec<usize>,
}

impl Default for ModelDims {
    fn default() -> Self {
        Self {
            hidden: vec![32, 16],
            nn_hidden: NN_HIDDEN.to_vec(),
        }
    }
}

impl ModelDims {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::Config(format!("hidden dims must be nonempty and positive, got {:?}", self.hidden)));
        }
        if self.nn_hidden.contains(&0) {
            return Err(Error::Config(format!("nn hidden dims must be positive, got {:?}", self.nn_hidden)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct StackedModel<T = f64> {
    pub kind: ModelKind,
    /// Greedily trained encoder layers; their label heads are not used for
    /// prediction.
    pub layers: Vec<QaeLayer<T>>,
    pub classifier: HeadNet<T>,
    pub standardization: StandardizationStats<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    /// Positive-class probability, `rows × heads`.
    pub probabilities: Matrix<T>,
    /// `labels[i][j]`: positive iff probability ≥ 0.5.
    pub labels: Vec<Vec<bool>>,
}

impl<T: Scalar> StackedModel<T> {
    pub fn input_dim(&self) -> usize {
        self.standardization.n_features()
    }

    pub fn latent_dim(&self) -> usize {
        self.layers.last().map_or(self.input_dim(), |l| l.hidden_dim())
    }

    pub fn n_heads(&self) -> usize {
        self.classifier.n_heads()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.param_count()).sum::<usize>() + self.classifier.param_count()
    }

    fn check_input(&self, x: &Matrix<T>) -> Result<()> {
        if x.cols() != self.input_dim() {
            return Err(Error::shape(
                "model input",
                format!("{} features", self.input_dim()),
                format!("{} features", x.cols()),
            ));
        }
        Ok(())
    }

    /// Final latent representation of standardized input.
    pub fn encode(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_input(x)?;
        let mut h = x.clone();
        for l in &self.layers {
            h = l.encode(&h)?;
        }
        Ok(h)
    }

    /// Predicts from standardized input. Unstandardized input is not detected.
    pub fn predict(&self, x: &Matrix<T>) -> Result<Prediction<T>> {
        let probabilities = self.classifier.predict_proba(&self.encode(x)?)?;
        let labels = hard_labels(&probabilities);
        Ok(Prediction { probabilities, labels })
    }

    /// Standardizes with the stored statistics, then predicts.
    pub fn predict_raw(&self, x: &Matrix<T>) -> Result<Prediction<T>> {
        self.check_input(x)?;
        self.predict(&self.standardization.apply(x)?)
    }
}

#[derive(Debug, Clone)]
pub struct TrainedModel<T> {
    pub model: StackedModel<T>,
    /// One history per trained stage, encoder layers first.
    pub histories: Vec<History>,
}

fn unit_weights<T: Scalar>(n_heads: usize) -> ClassWeights<T> {
    ClassWeights::uniform(n_heads, T::one())
}

/// Applies the configured imbalance handling to standardized training
/// data. Returns the (possibly augmented) rows and the class weights for
/// the encoder and classifier stages.
pub fn prepare_imbalance<T: Scalar>(
    x: &Matrix<T>,
    labels: &HeadLabels,
    cfg: &TrainConfig,
    rng: &Rng,
) -> Result<(Matrix<T>, HeadLabels, ClassWeights<T>, ClassWeights<T>)> {
    let h = labels.n_heads();
    match cfg.imbalance {
        Imbalance::WeightedClass => {
            let w: ClassWeights<T> = class_weights(labels)?;
            let cw = if cfg.classifier_weighted { w.clone() } else { unit_weights(h) };
            Ok((x.clone(), labels.clone(), w, cw))
        }
        Imbalance::Smote => {
            let (xs, ls) = oversample_heads(x, labels, cfg.smote_k, &mut rng.derive(SMOTE_STREAM))?;
            Ok((xs, ls, unit_weights(h), unit_weights(h)))
        }
        Imbalance::None => Ok((x.clone(), labels.clone(), unit_weights(h), unit_weights(h))),
    }
}

type Validation<'a, T> = Option<(&'a Matrix<T>, &'a HeadLabels)>;

#[allow(clippy::too_many_arguments)]
fn train_layers<T: Scalar>(
    x0: &Matrix<T>,
    labels: &HeadLabels,
    weights: &ClassWeights<T>,
    specs: &[QaeLayerSpec],
    loss: LayerLoss,
    validation: Validation<'_, T>,
    cfg: &TrainConfig,
    rng: &Rng,
) -> Result<(Vec<QaeLayer<T>>, Matrix<T>, Option<Matrix<T>>, Vec<History>)> {
    let mut layers = Vec::with_capacity(specs.len());
    let mut histories = Vec::with_capacity(specs.len());
    let mut x = x0.clone();
    let mut val_x = validation.map(|(v, _)| v.clone());
    for (k, spec) in specs.iter().enumerate() {
        let val = val_x.as_ref().zip(validation.map(|(_, l)| l));
        let mut layer_rng = rng.derive(layer_stream(k));
        let (layer, mut hist) = train_qae_layer_monitored(&x, labels, weights, spec, loss, val, cfg, &mut layer_rng)?;
        hist.stage = format!("{}{}", hist.stage, k + 1);
        x = layer.encode(&x)?;
        if let Some(v) = val_x.as_mut() {
            *v = layer.encode(v)?;
        }
        layers.push(layer);
        histories.push(hist);
    }
    Ok((layers, x, val_x, histories))
}

/// Trains `kind` on standardized features. The returned model carries
/// identity standardization.
pub fn train_standardized<T: Scalar>(
    kind: ModelKind,
    dims: &ModelDims,
    x0: &Matrix<T>,
    labels: &HeadLabels,
    cfg: &TrainConfig,
) -> Result<TrainedModel<T>> {
    train_standardized_with_validation(kind, dims, x0, labels, None, cfg)
}

/// As [`train_standardized`]; with `cfg.early_stop_on_validation` every
/// stage stops on its loss over `validation` (standardized) instead.
pub fn train_standardized_with_validation<T: Scalar>(
    kind: ModelKind,
    dims: &ModelDims,
    x0: &Matrix<T>,
    labels: &HeadLabels,
    validation: Validation<'_, T>,
    cfg: &TrainConfig,
) -> Result<TrainedModel<T>> {
    cfg.validate()?;
    dims.validate()?;
    if x0.rows() != labels.n_samples() {
        return Err(Error::shape("train", format!("{} rows", labels.n_samples()), x0.shape_str()));
    }
    if x0.rows() == 0 {
        return Err(Error::InsufficientData("training split is empty".into()));
    }
    let validation = if cfg.early_stop_on_validation {
        match validation {
            Some((vx, vl)) if vx.rows() > 0 && vx.rows() == vl.n_samples() && vx.cols() == x0.cols() => Some((vx, vl)),
            _ => {
                return Err(Error::Config(
                    "validation early stopping needs a nonempty validation split".into(),
                ))
            }
        }
    } else {
        None
    };
    let rng = Rng::new(cfg.seed);
    let (x, labs, w_enc, w_cls) = prepare_imbalance(x0, labels, cfg, &rng)?;
    let widths = kind.encoder_widths(&dims.hidden);
    let (layers, latent, val_latent, mut histories) = if widths.is_empty() {
        (Vec::new(), x.clone(), validation.map(|(v, _)| v.clone()), Vec::new())
    } else {
        let specs = QaeLayerSpec::chain(x.cols(), &widths, head_units(labs.n_heads()))?;
        let loss = match kind.encoder {
            EncoderKind::Quality => LayerLoss::Quality(cfg.loss_combiner),
            _ => LayerLoss::ReconstructionOnly,
        };
        train_layers(&x, &labs, &w_enc, &specs, loss, validation, cfg, &rng)?
    };
    let hidden = kind.classifier_hidden(&dims.nn_hidden);
    let val = val_latent.as_ref().zip(validation.map(|(_, l)| l));
    let mut cls_rng = rng.derive(CLASSIFIER_STREAM);
    let (classifier, hist) = train_head_net_monitored(&latent, &labs, &w_cls, hidden, val, cfg, &mut cls_rng)?;
    histories.push(hist);
    Ok(TrainedModel {
        model: StackedModel {
            kind,
            layers,
            classifier,
            standardization: StandardizationStats::identity(x0.cols()),
        },
        histories,
    })
}

/// Fits standardization on `x_raw`, then trains.
pub fn train_model<T: Scalar>(
    kind: ModelKind,
    dims: &ModelDims,
    x_raw: &Matrix<T>,
    labels: &HeadLabels,
    cfg: &TrainConfig,
) -> Result<TrainedModel<T>> {
    let stats = StandardizationStats::fit(x_raw)?;
    let mut trained = train_standardized(kind, dims, &stats.apply(x_raw)?, labels, cfg)?;
    trained.model.standardization = stats;
    Ok(trained)
}

/// Greedy layer-wise VWMHQAE training followed by a logistic classifier on
/// the final latent layer. `x0` must be standardized.
pub fn stack_train<T: Scalar>(
    x0: &Matrix<T>,
    labels: &HeadLabels,
    specs: &[QaeLayerSpec],
    cfg: &TrainConfig,
) -> Result<TrainedModel<T>> {
    let Some(first) = specs.first() else {
        return Err(Error::Config("at least one layer spec is required".into()));
    };
    for pair in specs.windows(2) {
        if pair[1].in_dim != pair[0].hidden_dim {
            return Err(Error::Config(format!("layer specs do not chain: {:?} then {:?}", pair[0], pair[1])));
        }
    }
    if first.in_dim != x0.cols() {
        return Err(Error::shape("stack_train", format!("{} input columns", first.in_dim), x0.shape_str()));
    }
    let dims = ModelDims {
        hidden: specs.iter().map(|s| s.hidden_dim).collect(),
        nn_hidden: Vec::new(),
    };
    train_standardized(ModelKind::SQAE_LR, &dims, x0, labels, cfg)
}

/// Trains a model whose encoder, if any, ignores the labels: `LR`, `NN`,
/// or a plain (stacked) autoencoder with either classifier.
pub fn train_baseline<T: Scalar>(
    kind: ModelKind,
    dims: &ModelDims,
    x0: &Matrix<T>,
    labels: &HeadLabels,
    cfg: &TrainConfig,
) -> Result<TrainedModel<T>> {
    if kind.uses_labels_in_encoder() {
        return Err(Error::Config(format!("{kind} is not a baseline model")));
    }
    train_standardized(kind, dims, x0, labels, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for name in ["LR", "NN", "AE+LR", "SAE+NN", "QAE+LR", "QAE+NN", "SQAE+LR", "SQAE+NN"] {
            let k: ModelKind = name.parse().unwrap();
            assert_eq!(k.to_string(), name);
        }
        assert!("XQAE+LR".parse::<ModelKind>().is_err());
        assert!("SQAE+SVM".parse::<ModelKind>().is_err());
        assert_eq!("sqae+lr".parse::<ModelKind>().unwrap(), ModelKind::SQAE_LR);
    }

    #[test]
    fn encoder_widths_by_kind() {
        let h = [32, 16];
        assert!(ModelKind::LR.encoder_widths(&h).is_empty());
        assert_eq!(ModelKind::QAE_LR.encoder_widths(&h), vec![16]);
        assert_eq!(ModelKind::SQAE_NN.encoder_widths(&h), vec![32, 16]);
    }
}
