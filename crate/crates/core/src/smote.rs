//! SMOTE oversampling.
//!
//! Each synthetic row is `x_i + u·(x_nn − x_i)` where `x_i` is a minority
//! row, `x_nn` one of its `k` nearest minority neighbours (Euclidean) and
//! `u ~ U(0, 1)`. Majority rows are never read.

use crate::error::{Error, Result};
use crate::labels::{HeadLabels, Label};
use crate::matrix::Matrix;
use crate::rng::Rng;
use crate::scalar::Scalar;

pub const DEFAULT_K: usize = 5;

/// Where a synthetic row came from, in minority-local row indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoteOrigin<T> {
    pub base: usize,
    pub neighbor: usize,
    pub gap: T,
}

fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

/// `k` nearest neighbours of every row among the others, ties broken by index.
pub fn nearest_neighbors<T: Scalar>(points: &Matrix<T>, k: usize) -> Vec<Vec<usize>> {
    let n = points.rows();
    (0..n)
        .map(|i| {
            let mut d: Vec<(T, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (squared_distance(points.row(i), points.row(j)), j))
                .collect();
            d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
            d.truncate(k);
            d.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

/// Generates `target_count` synthetic minority rows and their provenance.
pub fn smote_oversample_traced<T: Scalar>(
    features: &Matrix<T>,
    minority_mask: &[bool],
    k: usize,
    target_count: usize,
    rng: &mut Rng,
) -> Result<(Matrix<T>, Vec<SmoteOrigin<T>>)> {
    if minority_mask.len() != features.rows() {
        return Err(Error::shape(
            "smote_oversample",
            format!("{} mask entries", features.rows()),
            format!("{} mask entries", minority_mask.len()),
        ));
    }
    if k == 0 {
        return Err(Error::Config("SMOTE needs k >= 1".into()));
    }
    let minority_rows: Vec<usize> = (0..features.rows()).filter(|&i| minority_mask[i]).collect();
    if minority_rows.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "SMOTE needs at least 2 minority samples, found {}",
            minority_rows.len()
        )));
    }
    let mut out = Matrix::zeros(target_count, features.cols());
    let mut origins = Vec::with_capacity(target_count);
    if target_count == 0 {
        return Ok((out, origins));
    }
    let minority = features.select_rows(&minority_rows);
    let k_eff = k.min(minority.rows() - 1);
    let neighbors = nearest_neighbors(&minority, k_eff);
    for s in 0..target_count {
        let base = rng.below(minority.rows());
        let neighbor = neighbors[base][rng.below(k_eff)];
        let gap: T = rng.uniform();
        let (xi, xn) = (minority.row(base), minority.row(neighbor));
        for ((o, &a), &b) in out.row_mut(s).iter_mut().zip(xi).zip(xn) {
            *o = a + gap * (b - a);
        }
        origins.push(SmoteOrigin { base, neighbor, gap });
    }
    Ok((out, origins))
}

pub fn smote_oversample<T: Scalar>(
    features: &Matrix<T>,
    minority_mask: &[bool],
    k: usize,
    target_count: usize,
    rng: &mut Rng,
) -> Result<Matrix<T>> {
    smote_oversample_traced(features, minority_mask, k, target_count, rng).map(|(m, _)| m)
}

/// Oversamples each head independently on its observed rows until its two
/// classes are the same size. Synthetic rows carry a label for their own
/// head only. Heads already balanced, or missing a class entirely, are left
/// alone. Returns the augmented features and labels (originals first).
pub fn oversample_heads<T: Scalar>(
    features: &Matrix<T>,
    labels: &HeadLabels,
    k: usize,
    rng: &mut Rng,
) -> Result<(Matrix<T>, HeadLabels)> {
    let mut feats = features.clone();
    let mut labs = labels.clone();
    for j in 0..labels.n_heads() {
        let counts = labels.counts(j);
        if counts.negative == counts.positive || counts.negative == 0 || counts.positive == 0 {
            continue;
        }
        let minority_class = counts.positive < counts.negative;
        let need = counts.negative.max(counts.positive) - counts.negative.min(counts.positive);
        let rows = labels.observed_rows(j);
        let sub = features.select_rows(&rows);
        let mask: Vec<bool> = rows.iter().map(|&i| labels.get(i, j) == Some(minority_class)).collect();
        let mut head_rng = rng.derive(j as u64);
        let synth = smote_oversample(&sub, &mask, k, need, &mut head_rng)?;
        let mut new_labels: Vec<Label> = vec![None; need * labels.n_heads()];
        for r in 0..need {
            new_labels[r * labels.n_heads() + j] = Some(minority_class);
        }
        feats = feats.vstack(&synth)?;
        labs = labs.vstack(&HeadLabels::new(labels.n_heads(), new_labels)?)?;
    }
    Ok((feats, labs))
}
