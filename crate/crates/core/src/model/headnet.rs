//! Multi-headed classifiers: logistic regression (no hidden layers) or a
//! fully connected network with relu hidden layers.

use serde::{Deserialize, Serialize};

use super::train::{fit, FitOptions, History, LossRecord, Objective, TrainConfig};
use crate::activation::Activation;
use crate::dense::DenseLayer;
use crate::error::{Error, Result};
use crate::heads::{head_units, positive_probabilities};
use crate::labels::{ClassWeights, HeadLabels};
use crate::losses::multihead_weighted_ce_logits;
use crate::matrix::Matrix;
use crate::rng::Rng;
use crate::scalar::Scalar;

/// Hidden widths of the fully connected baseline.
pub const NN_HIDDEN: [usize; 2] = [100, 50];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct HeadNet<T = f64> {
    pub hidden: Vec<DenseLayer<T>>,
    /// Paired logits, two units per head.
    pub output: DenseLayer<T>,
}

impl<T: Scalar> HeadNet<T> {
    pub fn init(in_dim: usize, hidden: &[usize], n_heads: usize, rng: &mut Rng) -> Result<Self> {
        if in_dim == 0 || n_heads == 0 || hidden.contains(&0) {
            return Err(Error::Config(format!(
                "classifier dims must be positive: in {in_dim}, hidden {hidden:?}, heads {n_heads}"
            )));
        }
        let mut prev = in_dim;
        let mut layers = Vec::with_capacity(hidden.len());
        for &h in hidden {
            layers.push(DenseLayer::glorot(prev, h, Activation::Relu, rng));
            prev = h;
        }
        Ok(Self {
            hidden: layers,
            output: DenseLayer::glorot(prev, head_units(n_heads), Activation::Linear, rng),
        })
    }

    pub fn from_output(output: DenseLayer<T>) -> Self {
        Self {
            hidden: Vec::new(),
            output,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.hidden.first().unwrap_or(&self.output).in_dim()
    }

    pub fn n_heads(&self) -> usize {
        self.output.out_dim() / 2
    }

    pub fn hidden_dims(&self) -> Vec<usize> {
        self.hidden.iter().map(|l| l.out_dim()).collect()
    }

    pub fn param_count(&self) -> usize {
        self.hidden.iter().map(|l| l.param_count()).sum::<usize>() + self.output.param_count()
    }

    pub fn logits(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let mut a = x.clone();
        for l in &self.hidden {
            a = l.infer(&a)?;
        }
        self.output.infer(&a)
    }

    /// Positive-class probability per head, `rows × heads`.
    pub fn predict_proba(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        positive_probabilities(&self.logits(x)?)
    }

    pub fn params_mut(&mut self) -> Vec<&mut [T]> {
        let mut out = Vec::with_capacity(2 * (self.hidden.len() + 1));
        for l in &mut self.hidden {
            out.extend(l.params_mut());
        }
        out.extend(self.output.params_mut());
        out
    }

    pub fn loss_and_grads(
        &self,
        x: &Matrix<T>,
        labels: &HeadLabels,
        weights: &ClassWeights<T>,
    ) -> Result<(T, Vec<Vec<T>>)> {
        let mut caches = Vec::with_capacity(self.hidden.len());
        let mut a = x.clone();
        for l in &self.hidden {
            let (out, cache) = l.forward(&a)?;
            caches.push(cache);
            a = out;
        }
        let (logits, out_cache) = self.output.forward(&a)?;
        let (j, g) = multihead_weighted_ce_logits(labels, &logits, weights)?;
        let go = self.output.backward(&out_cache, &g)?;
        let mut rev = vec![go.bias, go.weights.into_vec()];
        let mut up = go.input;
        for (l, cache) in self.hidden.iter().zip(&caches).rev() {
            let gl = l.backward(cache, &up)?;
            rev.push(gl.bias);
            rev.push(gl.weights.into_vec());
            up = gl.input;
        }
        rev.reverse();
        Ok((j, rev))
    }
}

struct HeadObjective<'a, T> {
    x: &'a Matrix<T>,
    labels: &'a HeadLabels,
    weights: &'a ClassWeights<T>,
}

impl<T: Scalar> Objective<T> for HeadObjective<'_, T> {
    type Model = HeadNet<T>;

    fn n_rows(&self) -> usize {
        self.x.rows()
    }

    fn params_mut<'m>(&self, model: &'m mut HeadNet<T>) -> Vec<&'m mut [T]> {
        model.params_mut()
    }

    fn batch(&self, model: &HeadNet<T>, rows: &[usize]) -> Result<(T, Vec<Vec<T>>)> {
        model.loss_and_grads(&self.x.select_rows(rows), &self.labels.select_rows(rows), self.weights)
    }

    fn evaluate(&self, model: &HeadNet<T>) -> Result<LossRecord> {
        let (j, _) = multihead_weighted_ce_logits(self.labels, &model.logits(self.x)?, self.weights)?;
        Ok(LossRecord {
            j_y: Some(j.as_f64()),
            ..LossRecord::only(j.as_f64())
        })
    }
}

/// Trains a classifier with the given hidden widths end to end on the
/// weighted multi-head cross-entropy.
pub fn train_head_net<T: Scalar>(
    x: &Matrix<T>,
    labels: &HeadLabels,
    weights: &ClassWeights<T>,
    hidden: &[usize],
    cfg: &TrainConfig,
    rng: &mut Rng,
) -> Result<(HeadNet<T>, History)> {
    train_head_net_monitored(x, labels, weights, hidden, None, cfg, rng)
}

/// As [`train_head_net`], stopping early on the loss of `validation` when
/// one is given.
pub fn train_head_net_monitored<T: Scalar>(
    x: &Matrix<T>,
    labels: &HeadLabels,
    weights: &ClassWeights<T>,
    hidden: &[usize],
    validation: Option<(&Matrix<T>, &HeadLabels)>,
    cfg: &TrainConfig,
    rng: &mut Rng,
) -> Result<(HeadNet<T>, History)> {
    cfg.validate()?;
    if x.rows() == 0 {
        return Err(Error::InsufficientData("cannot train a classifier on zero rows".into()));
    }
    if labels.n_samples() != x.rows() {
        return Err(Error::shape(
            "train_classifier",
            format!("{} rows", labels.n_samples()),
            x.shape_str(),
        ));
    }
    let mut net = HeadNet::init(x.cols(), hidden, labels.n_heads(), rng)?;
    let objective = HeadObjective { x, labels, weights };
    let stage = if hidden.is_empty() { "classifier" } else { "nn" };
    let monitor = validation.map(|(x, labels)| HeadObjective { x, labels, weights });
    let history = fit(&objective, monitor.as_ref(), &mut net, &FitOptions::from(cfg), rng, stage)?;
    Ok((net, history))
}

/// Logistic-regression classifier on a latent representation.
pub fn train_classifier<T: Scalar>(
    xn: &Matrix<T>,
    labels: &HeadLabels,
    weights: &ClassWeights<T>,
    cfg: &TrainConfig,
    rng: &mut Rng,
) -> Result<(DenseLayer<T>, History)> {
    let (net, history) = train_head_net(xn, labels, weights, &[], cfg, rng)?;
    Ok((net.output, history))
}
