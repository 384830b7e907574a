//! Central finite differences, the reference every analytic gradient in
//! this crate is tested against. Not used on any training path.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `(f(p + eps·eᵢ) − f(p − eps·eᵢ)) / (2·eps)` for every coordinate `i`.
pub fn finite_difference_grad<T, F>(mut loss: F, params: &[T], eps: T) -> Result<Vec<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Result<T>,
{
    if !(eps > T::zero()) {
        return Err(Error::Config(format!("finite-difference step must be positive, got {eps}")));
    }
    let mut p = params.to_vec();
    let mut grad = Vec::with_capacity(p.len());
    let two_eps = eps + eps;
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + eps;
        let up = loss(&p)?;
        p[i] = orig - eps;
        let down = loss(&p)?;
        p[i] = orig;
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFinite(format!("loss evaluation at coordinate {i}")));
        }
        grad.push((up - down) / two_eps);
    }
    Ok(grad)
}

/// `max |a−b| / max(|a|, |b|, 1e-8)` over paired entries.
pub fn max_relative_error<T: Scalar>(analytic: &[T], numeric: &[T]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &b)| {
            let (a, b) = (a.as_f64(), b.as_f64());
            (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
        })
        .fold(0.0, f64::max)
}
