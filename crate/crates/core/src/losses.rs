//! Reconstruction, classification and combined training losses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heads::{negative_unit, positive_unit};
use crate::labels::{ClassWeights, HeadLabels};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Probabilities are clamped to `[EPS_CLIP, 1 − EPS_CLIP]` before any log.
pub const EPS_CLIP: f64 = 1e-12;

/// `(1/N) Σ ‖x − x̂‖²` over rows, with its gradient `(2/N)(x̂ − x)`.
pub fn mse_loss<T: Scalar>(x: &Matrix<T>, x_hat: &Matrix<T>) -> Result<(T, Matrix<T>)> {
    x.ensure_same_shape(x_hat, "mse_loss")?;
    let n = T::from_count(x.rows().max(1));
    let two_over_n = T::lit(2.0) / n;
    let mut sq = T::zero();
    let mut grad = Matrix::zeros(x.rows(), x.cols());
    for ((g, &a), &b) in grad.data_mut().iter_mut().zip(x.data()).zip(x_hat.data()) {
        let d = b - a;
        sq += d * d;
        *g = two_over_n * d;
    }
    Ok((sq / n, grad))
}

#[inline]
fn clamp_prob<T: Scalar>(p: T) -> T {
    let eps = T::lit(EPS_CLIP);
    p.max(eps).min(T::one() - eps)
}

/// `−y·ln ŷ − (1−y)·ln(1−ŷ)` with `ŷ` clamped.
pub fn binary_ce<T: Scalar>(y: bool, y_hat: T) -> T {
    let p = clamp_prob(y_hat);
    if y {
        -p.ln()
    } else {
        -(T::one() - p).ln()
    }
}

fn check_heads<T: Clone>(labels: &HeadLabels, units: usize, weights: &ClassWeights<T>, rows: usize) -> Result<()> {
    if weights.n_heads() != labels.n_heads() {
        return Err(Error::Config(format!(
            "{} class-weight heads for {} label heads",
            weights.n_heads(),
            labels.n_heads()
        )));
    }
    if units != 2 * labels.n_heads() || rows != labels.n_samples() {
        return Err(Error::shape(
            "multihead_weighted_ce",
            format!("{}x{}", labels.n_samples(), 2 * labels.n_heads()),
            format!("{rows}x{units}"),
        ));
    }
    Ok(())
}

/// Weighted multi-head cross-entropy on paired probabilities
/// (`rows × 2·heads`, negative unit then positive unit per head):
///
/// `J_y = (1/N) Σ_j Σ_{i observed at j} −w_j^{t} · ln ŷ_{i,j}^{t}` where `t` is
/// the observed class. Missing entries contribute nothing and get zero gradient.
pub fn multihead_weighted_ce<T: Scalar>(
    labels: &HeadLabels,
    probs: &Matrix<T>,
    weights: &ClassWeights<T>,
) -> Result<(T, Matrix<T>)> {
    check_heads(labels, probs.cols(), weights, probs.rows())?;
    let n = T::from_count(labels.n_samples().max(1));
    let eps = T::lit(EPS_CLIP);
    let mut total = T::zero();
    let mut grad = Matrix::zeros(probs.rows(), probs.cols());
    for i in 0..labels.n_samples() {
        for j in 0..labels.n_heads() {
            let Some(pos) = labels.get(i, j) else { continue };
            let unit = if pos { positive_unit(j) } else { negative_unit(j) };
            let w = weights.get(j, pos);
            let raw = probs.get(i, unit);
            let p = clamp_prob(raw);
            total += -w * p.ln();
            // The clamp is flat outside its range.
            if raw > eps && raw < T::one() - eps {
                grad.set(i, unit, -w / (n * p));
            }
        }
    }
    Ok((total / n, grad))
}

/// Same loss as [`multihead_weighted_ce`] but evaluated from paired logits
/// through the pair softmax, returning the gradient with respect to the
/// logits. This is the form used during training.
pub fn multihead_weighted_ce_logits<T: Scalar>(
    labels: &HeadLabels,
    logits: &Matrix<T>,
    weights: &ClassWeights<T>,
) -> Result<(T, Matrix<T>)> {
    check_heads(labels, logits.cols(), weights, logits.rows())?;
    let n = T::from_count(labels.n_samples().max(1));
    let log_eps = T::lit(EPS_CLIP.ln());
    let mut total = T::zero();
    let mut grad = Matrix::zeros(logits.rows(), logits.cols());
    for i in 0..labels.n_samples() {
        for j in 0..labels.n_heads() {
            let Some(pos) = labels.get(i, j) else { continue };
            let (t_unit, o_unit) = if pos {
                (positive_unit(j), negative_unit(j))
            } else {
                (negative_unit(j), positive_unit(j))
            };
            let w = weights.get(j, pos);
            let zt = logits.get(i, t_unit);
            let zo = logits.get(i, o_unit);
            // ln p_t = −ln(1 + e^{zo − zt}), computed without overflow.
            let d = zo - zt;
            let log_pt = -(if d > T::zero() {
                d + (-d).exp().ln_1p()
            } else {
                d.exp().ln_1p()
            });
            total += -w * log_pt.max(log_eps);
            let p_other = crate::activation::sigmoid(d);
            // ∂(−w ln p_t)/∂z_t = −w·p_o, ∂/∂z_o = w·p_o.
            let g = w * p_other / n;
            grad.set(i, t_unit, -g);
            grad.set(i, o_unit, g);
        }
    }
    Ok((total / n, grad))
}

/// Trainable task variances stored as log-variances `s = ln σ²`:
/// `log_var[0]` for reconstruction, `log_var[1]` for classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct VarianceParams<T = f64> {
    pub log_var: [T; 2],
}

impl<T: Scalar> Default for VarianceParams<T> {
    fn default() -> Self {
        Self::new(T::zero(), T::zero())
    }
}

impl<T: Scalar> VarianceParams<T> {
    pub fn new(s1: T, s2: T) -> Self {
        Self { log_var: [s1, s2] }
    }

    pub fn s1(&self) -> T {
        self.log_var[0]
    }

    pub fn s2(&self) -> T {
        self.log_var[1]
    }

    pub fn sigma1_sq(&self) -> T {
        self.s1().exp()
    }

    pub fn sigma2_sq(&self) -> T {
        self.s2().exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceLoss<T> {
    pub total: T,
    pub grad_s1: T,
    pub grad_s2: T,
    /// `∂J/∂J_x`, the factor applied to the reconstruction gradient.
    pub weight_x: T,
    /// `∂J/∂J_y`, the factor applied to the classification gradient.
    pub weight_y: T,
}

/// `J = J_x/(2σ₁²) + J_y/σ₂² + ln σ₁ + ln σ₂` with `σ² = exp(s)`.
///
/// In log-variance form `ln σ = s/2`, so
/// `∂J/∂s₁ = 1/2 − J_x·e^{−s₁}/2` and `∂J/∂s₂ = 1/2 − J_y·e^{−s₂}`.
pub fn combined_loss_variance<T: Scalar>(j_x: T, j_y: T, v: &VarianceParams<T>) -> VarianceLoss<T> {
    let half = T::lit(0.5);
    let weight_x = half * (-v.s1()).exp();
    let weight_y = (-v.s2()).exp();
    VarianceLoss {
        total: weight_x * j_x + weight_y * j_y + half * v.s1() + half * v.s2(),
        grad_s1: half - weight_x * j_x,
        grad_s2: half - weight_y * j_y,
        weight_x,
        weight_y,
    }
}

/// `λ·J_x + (1−λ)·J_y`.
pub fn combined_loss_naive<T: Scalar>(j_x: T, j_y: T, lambda: T) -> Result<T> {
    check_lambda(lambda.as_f64())?;
    Ok(lambda * j_x + (T::one() - lambda) * j_y)
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Config(format!("naive loss weight must lie in [0, 1], got {lambda}")));
    }
    Ok(())
}

/// How reconstruction and classification losses are merged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossCombiner {
    VarianceWeighted,
    Naive { lambda: f64 },
}

impl Default for LossCombiner {
    fn default() -> Self {
        LossCombiner::VarianceWeighted
    }
}

impl LossCombiner {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LossCombiner::VarianceWeighted => Ok(()),
            LossCombiner::Naive { lambda } => check_lambda(lambda),
        }
    }

    /// Short legend tag: `VWL` or `WL`.
    pub fn abbrev(&self) -> &'static str {
        match self {
            LossCombiner::VarianceWeighted => "VWL",
            LossCombiner::Naive { .. } => "WL",
        }
    }
}
