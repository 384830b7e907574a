//! Bias-corrected Adam.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }
}

/// Moment accumulators for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T = f64> {
    config: AdamConfig,
    first: Vec<T>,
    second: Vec<T>,
    step: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(len: usize, config: AdamConfig) -> Self {
        Self {
            config,
            first: vec![T::zero(); len],
            second: vec![T::zero(); len],
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &[T] {
        &self.first
    }

    pub fn second_moment(&self) -> &[T] {
        &self.second
    }

    pub fn update(&mut self, params: &mut [T], grads: &[T]) -> Result<()> {
        if params.len() != grads.len() || params.len() != self.first.len() {
            return Err(Error::shape(
                "adam_step",
                format!("{} parameters and gradients", self.first.len()),
                format!("{} parameters, {} gradients", params.len(), grads.len()),
            ));
        }
        self.step += 1;
        let c = self.config;
        let (b1, b2) = (T::lit(c.beta1), T::lit(c.beta2));
        let lr = T::lit(c.learning_rate);
        let eps = T::lit(c.epsilon);
        let bc1 = T::one() - b1.powi(self.step.min(i32::MAX as u64) as i32);
        let bc2 = T::one() - b2.powi(self.step.min(i32::MAX as u64) as i32);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first.iter_mut())
            .zip(self.second.iter_mut())
        {
            *m = b1 * *m + (T::one() - b1) * g;
            *v = b2 * *v + (T::one() - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }

    pub fn update_matrix(&mut self, params: &mut Matrix<T>, grads: &Matrix<T>) -> Result<()> {
        params.ensure_same_shape(grads, "adam_step")?;
        self.update(params.data_mut(), grads.data())
    }
}

/// One [`AdamState`] per parameter tensor, stepped together.
#[derive(Debug, Clone)]
pub struct Adam<T = f64> {
    states: Vec<AdamState<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(sizes: &[usize], config: AdamConfig) -> Self {
        Self {
            states: sizes.iter().map(|&n| AdamState::new(n, config)).collect(),
        }
    }

    pub fn step(&mut self, params: Vec<&mut [T]>, grads: &[Vec<T>]) -> Result<()> {
        if params.len() != self.states.len() || grads.len() != self.states.len() {
            return Err(Error::Internal(format!(
                "optimizer tracks {} tensors, got {} parameters and {} gradients",
                self.states.len(),
                params.len(),
                grads.len()
            )));
        }
        for ((state, p), g) in self.states.iter_mut().zip(params).zip(grads) {
            state.update(p, g)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_fixed_point() {
        let mut st = AdamState::<f64>::new(3, AdamConfig::default());
        let mut p = vec![1.0, -2.0, 0.5];
        st.update(&mut p, &[0.0; 3]).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
        assert_eq!(st.first_moment(), &[0.0; 3]);
        assert_eq!(st.second_moment(), &[0.0; 3]);
        assert_eq!(st.step_count(), 1);
    }

    #[test]
    fn first_two_steps_move_by_learning_rate() {
        // m̂ = g and v̂ = g² on every step for a constant gradient,
        // so Δ = lr · g / (|g| + ε).
        let lr = 1e-3;
        let expected = lr * 1.0 / (1.0 + 1e-8);
        let mut st = AdamState::<f64>::new(1, AdamConfig::default());
        let mut p = vec![0.0];
        st.update(&mut p, &[1.0]).unwrap();
        assert!((p[0] + expected).abs() < 1e-12);
        assert!((p[0].abs() - lr).abs() <= 1e-6);
        let before = p[0];
        st.update(&mut p, &[1.0]).unwrap();
        assert!(((before - p[0]) - expected).abs() < 1e-12);
        assert_eq!(st.step_count(), 2);
    }

    #[test]
    fn shape_mismatch() {
        let mut st = AdamState::<f64>::new(2, AdamConfig::default());
        let mut p = Matrix::zeros(1, 2);
        assert!(st.update_matrix(&mut p, &Matrix::zeros(2, 1)).is_err());
        assert!(st.update(&mut [0.0; 2], &[0.0; 3]).is_err());
    }
}
