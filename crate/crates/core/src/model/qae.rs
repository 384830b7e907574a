//! A single quality-driven autoencoder layer.

use serde::{Deserialize, Serialize};

use super::train::{fit, FitOptions, History, LossRecord, Objective, TrainConfig};
use crate::activation::Activation;
use crate::dense::DenseLayer;
use crate::error::{Error, Result};
use crate::heads::{head_units, pair_softmax};
use crate::labels::{ClassWeights, HeadLabels};
use crate::losses::{combined_loss_variance, mse_loss, multihead_weighted_ce_logits, LossCombiner, VarianceParams};
use crate::matrix::Matrix;
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaeLayerSpec {
    pub in_dim: usize,
    pub hidden_dim: usize,
    /// Two per measurement step.
    pub head_units: usize,
}

impl QaeLayerSpec {
    pub fn new(in_dim: usize, hidden_dim: usize, head_units: usize) -> Result<Self> {
        let s = Self {
            in_dim,
            hidden_dim,
            head_units,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_dim == 0 || self.hidden_dim == 0 || self.head_units == 0 {
            return Err(Error::Config(format!("layer dims must be positive: {self:?}")));
        }
        if self.head_units % 2 != 0 {
            return Err(Error::Config(format!("head units must be even, got {}", self.head_units)));
        }
        Ok(())
    }

    /// Chain of specs `in → h1 → h2 → …`.
    pub fn chain(in_dim: usize, hidden: &[usize], head_units: usize) -> Result<Vec<Self>> {
        if hidden.is_empty() {
            return Err(Error::Config("hidden dims must not be empty".into()));
        }
        let mut prev = in_dim;
        hidden
            .iter()
            .map(|&h| {
                let s = Self::new(prev, h, head_units)?;
                prev = h;
                Ok(s)
            })
            .collect()
    }
}

/// What a layer is trained to do.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerLoss {
    /// Reconstruction plus weighted multi-head classification.
    Quality(LossCombiner),
    /// Plain autoencoder: reconstruction only, no label head.
    ReconstructionOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct QaeLayer<T = f64> {
    pub encoder: DenseLayer<T>,
    pub decoder_x: DenseLayer<T>,
    /// Absent for a plain autoencoder layer.
    pub decoder_y: Option<DenseLayer<T>>,
    pub variance: VarianceParams<T>,
}

#[derive(Debug, Clone)]
pub struct QaeOutput<T> {
    pub h: Matrix<T>,
    pub x_hat: Matrix<T>,
    /// Paired probabilities, `rows × head_units`.
    pub y_hat: Option<Matrix<T>>,
}

impl<T: Scalar> QaeLayer<T> {
    pub fn init(spec: &QaeLayerSpec, with_head: bool, rng: &mut Rng) -> Result<Self> {
        spec.validate()?;
        let encoder = DenseLayer::glorot(spec.in_dim, spec.hidden_dim, Activation::Relu, rng);
        let decoder_x = DenseLayer::glorot(spec.hidden_dim, spec.in_dim, Activation::Linear, rng);
        let decoder_y = with_head.then(|| DenseLayer::glorot(spec.hidden_dim, spec.head_units, Activation::Linear, rng));
        Ok(Self {
            encoder,
            decoder_x,
            decoder_y,
            variance: VarianceParams::default(),
        })
    }

    pub fn zeros(spec: &QaeLayerSpec) -> Self {
        Self {
            encoder: DenseLayer::zeros(spec.in_dim, spec.hidden_dim, Activation::Relu),
            decoder_x: DenseLayer::zeros(spec.hidden_dim, spec.in_dim, Activation::Linear),
            decoder_y: Some(DenseLayer::zeros(spec.hidden_dim, spec.head_units, Activation::Linear)),
            variance: VarianceParams::default(),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.encoder.in_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.encoder.out_dim()
    }

    pub fn param_count(&self) -> usize {
        self.encoder.param_count() + self.decoder_x.param_count() + self.decoder_y.as_ref().map_or(0, |d| d.param_count())
    }

    pub fn encode(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        self.encoder.infer(x)
    }

    pub fn forward(&self, x: &Matrix<T>) -> Result<QaeOutput<T>> {
        let h = self.encoder.infer(x)?;
        let x_hat = self.decoder_x.infer(&h)?;
        let y_hat = match &self.decoder_y {
            Some(d) => Some(pair_softmax(&d.infer(&h)?)?),
            None => None,
        };
        Ok(QaeOutput { h, x_hat, y_hat })
    }

    /// Encoder, decoder-x, decoder-y (weights then bias each), then the two
    /// log-variances.
    pub fn params_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = Vec::with_capacity(7);
        out.extend(self.encoder.params_mut());
        out.extend(self.decoder_x.params_mut());
        if let Some(d) = self.decoder_y.as_mut() {
            out.extend(d.params_mut());
        }
        out.push(&mut self.variance.log_var[..]);
        out
    }

    /// Loss breakdown without the backward pass.
    pub fn loss(
        &self,
        x: &Matrix<T>,
        labels: &HeadLabels,
        weights: &ClassWeights<T>,
        loss: LayerLoss,
    ) -> Result<LossRecord> {
        let h = self.encoder.infer(x)?;
        let (j_x, _) = mse_loss(x, &self.decoder_x.infer(&h)?)?;
        let (LayerLoss::Quality(combiner), Some(dec_y)) = (loss, &self.decoder_y) else {
            return Ok(LossRecord::only(j_x.as_f64()));
        };
        let (j_y, _) = multihead_weighted_ce_logits(labels, &dec_y.infer(&h)?, weights)?;
        Ok(match combiner {
            LossCombiner::VarianceWeighted => LossRecord {
                total: combined_loss_variance(j_x, j_y, &self.variance).total.as_f64(),
                j_x: Some(j_x.as_f64()),
                j_y: Some(j_y.as_f64()),
                sigma1_sq: Some(self.variance.sigma1_sq().as_f64()),
                sigma2_sq: Some(self.variance.sigma2_sq().as_f64()),
            },
            LossCombiner::Naive { lambda } => {
                let l = T::lit(lambda);
                LossRecord {
                    total: (l * j_x + (T::one() - l) * j_y).as_f64(),
                    j_x: Some(j_x.as_f64()),
                    j_y: Some(j_y.as_f64()),
                    sigma1_sq: None,
                    sigma2_sq: None,
                }
            }
        })
    }

    /// Joint loss and gradients (same order as [`QaeLayer::params_mut`]).
    pub fn loss_and_grads(
        &self,
        x: &Matrix<T>,
        labels: &HeadLabels,
        weights: &ClassWeights<T>,
        loss: LayerLoss,
    ) -> Result<(LossRecord, T, Vec<Vec<T>>)> {
        let (h, enc_cache) = self.encoder.forward(x)?;
        let (x_hat, dx_cache) = self.decoder_x.forward(&h)?;
        let (j_x, mut g_xhat) = mse_loss(x, &x_hat)?;

        let mut tail: Vec<Vec<T>> = Vec::new();
        let (record, total, dh) = match (loss, &self.decoder_y) {
            (LayerLoss::ReconstructionOnly, _) | (_, None) => {
                let gx = self.decoder_x.backward(&dx_cache, &g_xhat)?;
                tail.push(gx.weights.into_vec());
                tail.push(gx.bias);
                (LossRecord::only(j_x.as_f64()), j_x, gx.input)
            }
            (LayerLoss::Quality(combiner), Some(dec_y)) => {
                let (logits, dy_cache) = dec_y.forward(&h)?;
                let (j_y, mut g_logits) = multihead_weighted_ce_logits(labels, &logits, weights)?;
                let (total, wx, wy, gs, record) = match combiner {
                    LossCombiner::VarianceWeighted => {
                        let v = combined_loss_variance(j_x, j_y, &self.variance);
                        let rec = LossRecord {
                            total: v.total.as_f64(),
                            j_x: Some(j_x.as_f64()),
                            j_y: Some(j_y.as_f64()),
                            sigma1_sq: Some(self.variance.sigma1_sq().as_f64()),
                            sigma2_sq: Some(self.variance.sigma2_sq().as_f64()),
                        };
                        (v.total, v.weight_x, v.weight_y, [v.grad_s1, v.grad_s2], rec)
                    }
                    LossCombiner::Naive { lambda } => {
                        let l = T::lit(lambda);
                        let total = l * j_x + (T::one() - l) * j_y;
                        let rec = LossRecord {
                            total: total.as_f64(),
                            j_x: Some(j_x.as_f64()),
                            j_y: Some(j_y.as_f64()),
                            sigma1_sq: None,
                            sigma2_sq: None,
                        };
                        (total, l, T::one() - l, [T::zero(); 2], rec)
                    }
                };
                g_xhat.scale_in_place(wx);
                g_logits.scale_in_place(wy);
                let gx = self.decoder_x.backward(&dx_cache, &g_xhat)?;
                let gy = dec_y.backward(&dy_cache, &g_logits)?;
                let mut dh = gx.input;
                dh.add_assign(&gy.input)?;
                tail.push(gx.weights.into_vec());
                tail.push(gx.bias);
                tail.push(gy.weights.into_vec());
                tail.push(gy.bias);
                tail.push(gs.to_vec());
                (record, total, dh)
            }
        };
        let ge = self.encoder.backward(&enc_cache, &dh)?;
        let mut grads = vec![ge.weights.into_vec(), ge.bias];
        grads.extend(tail);
        if grads.len() == 4 {
            // Untrained head and variance slots still occupy their positions.
            if let Some(d) = &self.decoder_y {
                grads.push(vec![T::zero(); d.weights().data().len()]);
                grads.push(vec![T::zero(); d.out_dim()]);
            }
            grads.push(vec![T::zero(); 2]);
        }
        Ok((record, total, grads))
    }
}

struct LayerObjective<'a, T> {
    x: &'a Matrix<T>,
    labels: &'a HeadLabels,
    weights: &'a ClassWeights<T>,
    loss: LayerLoss,
}

impl<T: Scalar> Objective<T> for LayerObjective<'_, T> {
    type Model = QaeLayer<T>;

    fn n_rows(&self) -> usize {
        self.x.rows()
    }

    fn params_mut<'m>(&self, model: &'m mut QaeLayer<T>) -> Vec<&'m mut [T]> {
        model.params_mut()
    }

    fn batch(&self, model: &QaeLayer<T>, rows: &[usize]) -> Result<(T, Vec<Vec<T>>)> {
        let x = self.x.select_rows(rows);
        let labels = self.labels.select_rows(rows);
        let (_, total, grads) = model.loss_and_grads(&x, &labels, self.weights, self.loss)?;
        Ok((total, grads))
    }

    fn evaluate(&self, model: &QaeLayer<T>) -> Result<LossRecord> {
        model.loss(self.x, self.labels, self.weights, self.loss)
    }
}

/// Trains one layer on `x` (standardized) against `labels`.
pub fn train_qae_layer<T: Scalar>(
    x: &Matrix<T>,
    labels: &HeadLabels,
    weights: &ClassWeights<T>,
    spec: &QaeLayerSpec,
    loss: LayerLoss,
    cfg: &TrainConfig,
    rng: &mut Rng,
) -> Result<(QaeLayer<T>, History)> {
    train_qae_layer_monitored(x, labels, weights, spec, loss, None, cfg, rng)
}

/// As [`train_qae_layer`], stopping early on the loss of `validation` when
/// one is given.
#[allow(clippy::too_many_arguments)]
pub fn train_qae_layer_monitored<T: Scalar>(
    x: &Matrix<T>,
    labels: &HeadLabels,
    weights: &ClassWeights<T>,
    spec: &QaeLayerSpec,
    loss: LayerLoss,
    validation: Option<(&Matrix<T>, &HeadLabels)>,
    cfg: &TrainConfig,
    rng: &mut Rng,
) -> Result<(QaeLayer<T>, History)> {
    cfg.validate()?;
    if x.rows() == 0 {
        return Err(Error::InsufficientData("cannot train a layer on zero rows".into()));
    }
    if x.cols() != spec.in_dim || labels.n_samples() != x.rows() {
        return Err(Error::shape(
            "train_qae_layer",
            format!("{} rows x {} cols", labels.n_samples(), spec.in_dim),
            x.shape_str(),
        ));
    }
    if head_units(labels.n_heads()) != spec.head_units {
        return Err(Error::Config(format!(
            "layer has {} head units but labels have {} heads",
            spec.head_units,
            labels.n_heads()
        )));
    }
    let quality = matches!(loss, LayerLoss::Quality(_));
    let mut layer = QaeLayer::init(spec, quality, rng)?;
    let objective = LayerObjective {
        x,
        labels,
        weights,
        loss,
    };
    let monitor = validation.map(|(x, labels)| LayerObjective {
        x,
        labels,
        weights,
        loss,
    });
    let stage = if quality { "qae" } else { "ae" };
    let history = fit(&objective, monitor.as_ref(), &mut layer, &FitOptions::from(cfg), rng, stage)?;
    Ok((layer, history))
}
