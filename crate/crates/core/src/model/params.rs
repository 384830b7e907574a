use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerParams {
    pub encoder: usize,
    pub decoder_x: usize,
    pub decoder_y: usize,
}

impl LayerParams {
    pub fn total(&self) -> usize {
        self.encoder + self.decoder_x + self.decoder_y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamCount {
    pub layers: Vec<LayerParams>,
    pub classifier: usize,
    pub total: usize,
    /// Encoders and input decoders only: a plain stacked autoencoder.
    pub plain_ae: usize,
    /// Label heads plus classifier, relative to `plain_ae`.
    pub overhead_ratio: f64,
}

/// Exact parameter count of a stacked quality-driven autoencoder with a
/// logistic classifier.
pub fn count_parameters(input_dim: usize, hidden_dims: &[usize], head_units: usize) -> Result<ParamCount> {
    if hidden_dims.is_empty() {
        return Err(Error::Config("hidden dims must not be empty".into()));
    }
    if input_dim == 0 || head_units == 0 || hidden_dims.contains(&0) {
        return Err(Error::Config(format!(
            "dims must be positive: input {input_dim}, hidden {hidden_dims:?}, heads {head_units}"
        )));
    }
    let mut prev = input_dim;
    let layers: Vec<LayerParams> = hidden_dims
        .iter()
        .map(|&h| {
            let p = LayerParams {
                encoder: (prev + 1) * h,
                decoder_x: (h + 1) * prev,
                decoder_y: (h + 1) * head_units,
            };
            prev = h;
            p
        })
        .collect();
    let classifier = (prev + 1) * head_units;
    let plain_ae: usize = layers.iter().map(|l| l.encoder + l.decoder_x).sum();
    let heads: usize = layers.iter().map(|l| l.decoder_y).sum::<usize>() + classifier;
    Ok(ParamCount {
        total: plain_ae + heads,
        overhead_ratio: heads as f64 / plain_ae as f64,
        layers,
        classifier,
        plain_ae,
    })
}
