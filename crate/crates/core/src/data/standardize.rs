use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Smallest divisor applied; constant columns come out centered at zero.
pub const STD_FLOOR: f64 = 1e-12;

/// Per-feature mean and population standard deviation of a fitting split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct StandardizationStats<T = f64> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

impl<T: Scalar> StandardizationStats<T> {
    pub fn fit(features: &Matrix<T>) -> Result<Self> {
        if features.rows() == 0 {
            return Err(Error::InsufficientData("cannot standardize an empty feature matrix".into()));
        }
        let n = T::from_count(features.rows());
        let mean: Vec<T> = features.column_sums().into_iter().map(|s| s / n).collect();
        let mut var = vec![T::zero(); features.cols()];
        for r in 0..features.rows() {
            for ((v, &x), &m) in var.iter_mut().zip(features.row(r)).zip(&mean) {
                let d = x - m;
                *v += d * d;
            }
        }
        let std = var.into_iter().map(|v| (v / n).sqrt()).collect();
        Ok(Self { mean, std })
    }

    pub fn identity(n_features: usize) -> Self {
        Self {
            mean: vec![T::zero(); n_features],
            std: vec![T::one(); n_features],
        }
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    fn divisor(&self, j: usize) -> T {
        self.std[j].max(T::lit(STD_FLOOR))
    }

    fn check(&self, features: &Matrix<T>) -> Result<()> {
        if features.cols() != self.n_features() {
            return Err(Error::shape(
                "standardize",
                format!("{} features", self.n_features()),
                format!("{} features", features.cols()),
            ));
        }
        Ok(())
    }

    pub fn apply(&self, features: &Matrix<T>) -> Result<Matrix<T>> {
        self.check(features)?;
        let mut out = features.clone();
        for r in 0..out.rows() {
            for (j, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.divisor(j);
            }
        }
        Ok(out)
    }

    pub fn inverse(&self, standardized: &Matrix<T>) -> Result<Matrix<T>> {
        self.check(standardized)?;
        let mut out = standardized.clone();
        for r in 0..out.rows() {
            for (j, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = *v * self.divisor(j) + self.mean[j];
            }
        }
        Ok(out)
    }
}
