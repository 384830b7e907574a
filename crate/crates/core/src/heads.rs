//! Output-unit layout for multi-headed classification.
//!
//! Each measurement step owns two adjacent output units, negative at `2j`
//! and positive at `2j + 1`. The pair is normalized with a two-way softmax,
//! so the two probabilities of a step always sum to one and the positive
//! probability equals `sigmoid(z_pos − z_neg)`.

use crate::activation::sigmoid;
use crate::error::{Error, Result};
use crate::labels::HeadLabels;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub const UNITS_PER_HEAD: usize = 2;

#[inline]
pub fn head_units(n_heads: usize) -> usize {
    UNITS_PER_HEAD * n_heads
}

#[inline]
pub fn negative_unit(head: usize) -> usize {
    UNITS_PER_HEAD * head
}

#[inline]
pub fn positive_unit(head: usize) -> usize {
    UNITS_PER_HEAD * head + 1
}

fn check_paired(units: &Matrix<impl Scalar>, op: &'static str) -> Result<usize> {
    if units.cols() % UNITS_PER_HEAD != 0 || units.cols() == 0 {
        return Err(Error::shape(op, "a positive even number of output units", format!("{} units", units.cols())));
    }
    Ok(units.cols() / UNITS_PER_HEAD)
}

/// Per-pair softmax over logits, same shape as the input.
pub fn pair_softmax<T: Scalar>(logits: &Matrix<T>) -> Result<Matrix<T>> {
    let n_heads = check_paired(logits, "pair_softmax")?;
    let mut out = Matrix::zeros(logits.rows(), logits.cols());
    for i in 0..logits.rows() {
        for j in 0..n_heads {
            let p = sigmoid(logits.get(i, positive_unit(j)) - logits.get(i, negative_unit(j)));
            out.set(i, positive_unit(j), p);
            out.set(i, negative_unit(j), T::one() - p);
        }
    }
    Ok(out)
}

/// `rows × n_heads` positive-class probabilities from paired logits.
pub fn positive_probabilities<T: Scalar>(logits: &Matrix<T>) -> Result<Matrix<T>> {
    let n_heads = check_paired(logits, "positive_probabilities")?;
    let mut out = Matrix::zeros(logits.rows(), n_heads);
    for i in 0..logits.rows() {
        for j in 0..n_heads {
            out.set(i, j, sigmoid(logits.get(i, positive_unit(j)) - logits.get(i, negative_unit(j))));
        }
    }
    Ok(out)
}

/// Positive iff probability ≥ 0.5; an exact tie goes to the positive class.
pub fn hard_labels<T: Scalar>(positive_probs: &Matrix<T>) -> Vec<Vec<bool>> {
    let half = T::lit(0.5);
    (0..positive_probs.rows())
        .map(|i| positive_probs.row(i).iter().map(|&p| p >= half).collect())
        .collect()
}

/// `(y⁰, y¹)` targets per observed entry; `None` where the head is missing.
pub fn encode_targets<T: Scalar>(labels: &HeadLabels) -> Vec<Vec<Option<[T; 2]>>> {
    (0..labels.n_samples())
        .map(|i| {
            labels
                .row(i)
                .iter()
                .map(|l| l.map(|pos| if pos { [T::zero(), T::one()] } else { [T::one(), T::zero()] }))
                .collect()
        })
        .collect()
}
