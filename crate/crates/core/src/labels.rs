//! Per-sample, per-head ternary labels and the per-head class weights
//! derived from them.

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `None` = not measured at this head, `Some(false)` = negative (pass),
/// `Some(true)` = positive (fail).
pub type Label = Option<bool>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadLabels {
    n_samples: usize,
    n_heads: usize,
    labels: Vec<Label>,
}

/// Observed class sizes for one head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub negative: usize,
    pub positive: usize,
}

impl ClassCounts {
    pub fn observed(&self) -> usize {
        self.negative + self.positive
    }

    pub fn get(&self, positive: bool) -> usize {
        if positive {
            self.positive
        } else {
            self.negative
        }
    }
}

impl HeadLabels {
    /// Row-major `labels`, `n_heads` per sample. Every sample must carry at
    /// least one observed label.
    pub fn new(n_heads: usize, labels: Vec<Label>) -> Result<Self> {
        if n_heads == 0 {
            return Err(Error::Config("at least one head is required".into()));
        }
        if labels.len() % n_heads != 0 {
            return Err(Error::shape(
                "HeadLabels::new",
                format!("a multiple of {n_heads} labels"),
                format!("{} labels", labels.len()),
            ));
        }
        let n_samples = labels.len() / n_heads;
        if let Some(row) = labels
            .chunks_exact(n_heads)
            .position(|r| r.iter().all(Option::is_none))
        {
            return Err(Error::InsufficientData(format!("sample {row} has no observed head")));
        }
        Ok(Self {
            n_samples,
            n_heads,
            labels,
        })
    }

    pub fn from_rows(rows: &[Vec<Label>]) -> Result<Self> {
        let n_heads = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_heads) {
            return Err(Error::shape("HeadLabels::from_rows", "rows of equal length", "ragged rows"));
        }
        Self::new(n_heads, rows.concat())
    }

    pub fn empty(n_heads: usize) -> Result<Self> {
        Self::new(n_heads, Vec::new())
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_heads(&self) -> usize {
        self.n_heads
    }

    #[inline]
    pub fn get(&self, sample: usize, head: usize) -> Label {
        self.labels[sample * self.n_heads + head]
    }

    pub fn row(&self, sample: usize) -> &[Label] {
        &self.labels[sample * self.n_heads..(sample + 1) * self.n_heads]
    }

    pub fn as_slice(&self) -> &[Label] {
        &self.labels
    }

    pub fn head(&self, head: usize) -> impl Iterator<Item = Label> + '_ {
        (0..self.n_samples).map(move |i| self.get(i, head))
    }

    pub fn counts(&self, head: usize) -> ClassCounts {
        let mut c = ClassCounts::default();
        for l in self.head(head).flatten() {
            if l {
                c.positive += 1;
            } else {
                c.negative += 1;
            }
        }
        c
    }

    pub fn all_counts(&self) -> Vec<ClassCounts> {
        (0..self.n_heads).map(|j| self.counts(j)).collect()
    }

    /// Number of observed entries in head `j` (the `n_j` of the loss).
    pub fn observed(&self, head: usize) -> usize {
        self.counts(head).observed()
    }

    pub fn observed_rows(&self, head: usize) -> Vec<usize> {
        (0..self.n_samples).filter(|&i| self.get(i, head).is_some()).collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut labels = Vec::with_capacity(idx.len() * self.n_heads);
        for &i in idx {
            labels.extend_from_slice(self.row(i));
        }
        Self {
            n_samples: idx.len(),
            n_heads: self.n_heads,
            labels,
        }
    }

    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.n_heads != other.n_heads {
            return Err(Error::shape(
                "HeadLabels::vstack",
                format!("{} heads", self.n_heads),
                format!("{} heads", other.n_heads),
            ));
        }
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Ok(Self {
            n_samples: self.n_samples + other.n_samples,
            n_heads: self.n_heads,
            labels,
        })
    }
}

/// Per-head loss multipliers for the negative and positive class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights<W = f64> {
    pub negative: Vec<W>,
    pub positive: Vec<W>,
}

impl<W: Clone> ClassWeights<W> {
    pub fn uniform(n_heads: usize, value: W) -> Self {
        Self {
            negative: vec![value.clone(); n_heads],
            positive: vec![value; n_heads],
        }
    }

    pub fn n_heads(&self) -> usize {
        self.negative.len()
    }

    pub fn get(&self, head: usize, positive: bool) -> W {
        if positive {
            self.positive[head].clone()
        } else {
            self.negative[head].clone()
        }
    }
}

/// `w_j^t = N / (2 · N_h · n_j^t)` with `N` the sample count and `N_h` the
/// head count. Classes absent from a head get weight zero.
///
/// Generic over the number type so the identity can be checked in exact
/// rational arithmetic as well as computed in floating point.
pub fn class_weights<W>(labels: &HeadLabels) -> Result<ClassWeights<W>>
where
    W: Clone + Num + FromPrimitive,
{
    if labels.n_samples() == 0 {
        return Err(Error::Config("class weights need at least one sample".into()));
    }
    let cast = |n: usize| W::from_usize(n).ok_or_else(|| Error::Internal(format!("{n} does not fit")));
    let total = cast(labels.n_samples())?;
    let mut out = ClassWeights {
        negative: Vec::with_capacity(labels.n_heads()),
        positive: Vec::with_capacity(labels.n_heads()),
    };
    for j in 0..labels.n_heads() {
        let c = labels.counts(j);
        for (count, dst) in [(c.negative, &mut out.negative), (c.positive, &mut out.positive)] {
            let w = if count == 0 {
                W::zero()
            } else {
                total.clone() / cast(2 * labels.n_heads() * count)?
            };
            dst.push(w);
        }
    }
    Ok(out)
}
