//! Fully connected layer: `Y = activation(X · Wᵀ + b)`.
//!
//! Batches are row-major, one sample per row. Weights are stored
//! `(out_dim, in_dim)`.

use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct DenseLayer<T = f64> {
    pub(crate) weights: Matrix<T>,
    pub(crate) bias: Vec<T>,
    pub(crate) activation: Activation,
}

/// What the backward pass needs from the forward pass.
#[derive(Debug, Clone)]
pub struct DenseCache<T> {
    input: Matrix<T>,
    pre: Matrix<T>,
    output: Matrix<T>,
}

impl<T> DenseCache<T> {
    pub fn output(&self) -> &Matrix<T> {
        &self.output
    }
}

#[derive(Debug, Clone)]
pub struct DenseGrads<T> {
    pub weights: Matrix<T>,
    pub bias: Vec<T>,
    pub input: Matrix<T>,
}

impl<T: Scalar> DenseLayer<T> {
    pub fn new(weights: Matrix<T>, bias: Vec<T>, activation: Activation) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::shape(
                "DenseLayer::new",
                format!("bias of length {}", weights.rows()),
                format!("bias of length {}", bias.len()),
            ));
        }
        if weights.rows() == 0 || weights.cols() == 0 {
            return Err(Error::Config("dense layer dimensions must be >= 1".into()));
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            weights: Matrix::zeros(out_dim, in_dim),
            bias: vec![T::zero(); out_dim],
            activation,
        }
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero bias.
    pub fn glorot(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut Rng) -> Self {
        let limit = T::lit((6.0 / (in_dim + out_dim) as f64).sqrt());
        let mut layer = Self::zeros(in_dim, out_dim, activation);
        for w in layer.weights.data_mut() {
            *w = rng.uniform_range(-limit, limit);
        }
        layer
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &Matrix<T> {
        &self.weights
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn param_count(&self) -> usize {
        (self.in_dim() + 1) * self.out_dim()
    }

    /// Weights then bias, the order used by optimizers and gradient vectors.
    pub fn params_mut(&mut self) -> [&mut [T]; 2] {
        [self.weights.data_mut(), &mut self.bias]
    }

    fn pre_activation(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        if x.cols() != self.in_dim() {
            return Err(Error::shape(
                "dense_forward",
                format!("input with {} columns (layer {}x{})", self.in_dim(), self.out_dim(), self.in_dim()),
                format!("input {}", x.shape_str()),
            ));
        }
        let mut z = x.matmul_transposed(&self.weights)?;
        z.add_row_vector(&self.bias)?;
        Ok(z)
    }

    /// Forward pass without retaining a cache.
    pub fn infer(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let z = self.pre_activation(x)?;
        Ok(self.activation.apply(&z))
    }

    pub fn forward(&self, x: &Matrix<T>) -> Result<(Matrix<T>, DenseCache<T>)> {
        let pre = self.pre_activation(x)?;
        let output = self.activation.apply(&pre);
        let cache = DenseCache {
            input: x.clone(),
            pre,
            output: output.clone(),
        };
        Ok((output, cache))
    }

    pub fn backward(&self, cache: &DenseCache<T>, upstream: &Matrix<T>) -> Result<DenseGrads<T>> {
        if cache.input.cols() != self.in_dim() || cache.pre.cols() != self.out_dim() {
            return Err(Error::Internal(format!(
                "cache for a {}->{} layer used with a {}->{} layer",
                cache.input.cols(),
                cache.pre.cols(),
                self.in_dim(),
                self.out_dim()
            )));
        }
        upstream.ensure_same_shape(&cache.pre, "dense_backward")?;
        let act = self.activation;
        let mut delta = upstream.clone();
        for ((d, &z), &a) in delta
            .data_mut()
            .iter_mut()
            .zip(cache.pre.data())
            .zip(cache.output.data())
        {
            *d *= act.derivative(z, a);
        }
        let weights = delta.transpose_matmul(&cache.input)?;
        let bias = delta.column_sums();
        let input = delta.matmul(&self.weights)?;
        Ok(DenseGrads { weights, bias, input })
    }
}
