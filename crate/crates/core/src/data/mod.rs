//! Datasets, CSV ingestion, standardization, splitting and the synthetic
//! wafer-line generator.

mod csv_io;
mod split;
mod standardize;
mod synthetic;

pub use csv_io::{csv_header, load_csv, load_features, load_labels, save_csv, CsvSchema};
pub use split::{split, Split, SplitFractions};
pub use standardize::{StandardizationStats, STD_FLOOR};
pub use synthetic::{generate_synthetic, SyntheticSpec};

use crate::error::{Error, Result};
use crate::labels::{HeadLabels, Label};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T = f64> {
    pub features: Matrix<T>,
    pub labels: HeadLabels,
    pub feature_names: Vec<String>,
    pub head_names: Vec<String>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(
        features: Matrix<T>,
        labels: HeadLabels,
        feature_names: Vec<String>,
        head_names: Vec<String>,
    ) -> Result<Self> {
        if features.rows() != labels.n_samples() {
            return Err(Error::shape(
                "Dataset::new",
                format!("{} label rows", features.rows()),
                format!("{} label rows", labels.n_samples()),
            ));
        }
        if feature_names.len() != features.cols() {
            return Err(Error::shape(
                "Dataset::new",
                format!("{} feature names", features.cols()),
                format!("{} feature names", feature_names.len()),
            ));
        }
        if head_names.len() != labels.n_heads() {
            return Err(Error::shape(
                "Dataset::new",
                format!("{} head names", labels.n_heads()),
                format!("{} head names", head_names.len()),
            ));
        }
        Ok(Self {
            features,
            labels,
            feature_names,
            head_names,
        })
    }

    /// Default names `x1..xp` and `Y1..Yk`.
    pub fn with_default_names(features: Matrix<T>, labels: HeadLabels) -> Result<Self> {
        let feature_names = (1..=features.cols()).map(|i| format!("x{i}")).collect();
        let head_names = (1..=labels.n_heads()).map(|j| format!("Y{j}")).collect();
        Self::new(features, labels, feature_names, head_names)
    }

    pub fn n_samples(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn n_heads(&self) -> usize {
        self.labels.n_heads()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(idx),
            labels: self.labels.select_rows(idx),
            feature_names: self.feature_names.clone(),
            head_names: self.head_names.clone(),
        }
    }

    pub fn with_features(&self, features: Matrix<T>) -> Result<Self> {
        Self::new(features, self.labels.clone(), self.feature_names.clone(), self.head_names.clone())
    }

    /// Single-head view with the measurement step as an input feature: one
    /// row per observed `(sample, head)` pair, the head identity one-hot
    /// encoded after the original features.
    pub fn flatten_heads(&self) -> Result<Self> {
        let k = self.n_heads();
        let p = self.n_features();
        let mut rows = Vec::new();
        let mut labels: Vec<Label> = Vec::new();
        for i in 0..self.n_samples() {
            for j in 0..k {
                if let Some(l) = self.labels.get(i, j) {
                    let mut r = self.features.row(i).to_vec();
                    r.extend((0..k).map(|h| if h == j { T::one() } else { T::zero() }));
                    rows.push(r);
                    labels.push(Some(l));
                }
            }
        }
        let features = if rows.is_empty() {
            Matrix::zeros(0, p + k)
        } else {
            Matrix::from_rows(&rows)?
        };
        let mut feature_names = self.feature_names.clone();
        feature_names.extend(self.head_names.iter().map(|h| format!("is_{h}")));
        Self::new(features, HeadLabels::new(1, labels)?, feature_names, vec!["outcome".into()])
    }
}
