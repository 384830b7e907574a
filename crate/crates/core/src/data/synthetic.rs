//! Desk-scale stand-in for wafer sensor data.
//!
//! Features are `H·A + noise` with a Gaussian latent `H` of rank
//! `latent_rank`. Each head labels the top `n / (1 + ratio)` samples of a
//! random quadratic form in `H` (of rank `score_rank`) as positive, so the requested imbalance
//! ratio is met exactly before label noise. Every `(sample, head)` is then
//! observed independently with the head's observation rate; a sample left
//! with no observation gets one head chosen uniformly.

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::labels::HeadLabels;
use crate::matrix::Matrix;
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    pub n_samples: usize,
    pub n_features: usize,
    pub latent_rank: usize,
    /// One entry per head: majority / minority class size.
    pub imbalance_ratios: Vec<f64>,
    /// One entry per head, in `(0, 1]`.
    pub observation_rates: Vec<f64>,
    pub label_noise: f64,
    /// Rank of each head's quadratic score form, at most `latent_rank`.
    pub score_rank: usize,
    /// Standard deviation of the additive feature noise.
    pub noise_scale: f64,
    /// Set from the run seed, never read from config files.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_samples: 5_000,
            n_features: 64,
            latent_rank: 8,
            imbalance_ratios: vec![2.0, 9.0, 50.0, 225.0],
            observation_rates: vec![0.6; 4],
            label_noise: 0.02,
            score_rank: 2,
            noise_scale: 0.1,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn n_heads(&self) -> usize {
        self.imbalance_ratios.len()
    }

    /// Positive count a head receives before noise.
    pub fn positives_for(&self, ratio: f64) -> usize {
        (self.n_samples as f64 / (1.0 + ratio)).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Specification(m));
        if self.n_samples == 0 || self.n_features == 0 || self.latent_rank == 0 {
            return bad("sample, feature and latent counts must be positive".into());
        }
        if self.latent_rank > self.n_features {
            return bad(format!(
                "latent rank {} exceeds feature count {}",
                self.latent_rank, self.n_features
            ));
        }
        if self.score_rank == 0 || self.score_rank > self.latent_rank {
            return bad(format!(
                "score rank {} must lie in 1..={}",
                self.score_rank, self.latent_rank
            ));
        }
        if self.imbalance_ratios.is_empty() {
            return bad("at least one head is required".into());
        }
        if self.observation_rates.len() != self.n_heads() {
            return bad(format!(
                "{} observation rates for {} heads",
                self.observation_rates.len(),
                self.n_heads()
            ));
        }
        if !(0.0..0.5).contains(&self.label_noise) {
            return bad(format!("label noise {} outside [0, 0.5)", self.label_noise));
        }
        if !(self.noise_scale >= 0.0) {
            return bad(format!("noise scale {} must be non-negative", self.noise_scale));
        }
        for (j, (&ratio, &rate)) in self.imbalance_ratios.iter().zip(&self.observation_rates).enumerate() {
            if !(ratio >= 1.0) || !ratio.is_finite() {
                return bad(format!("head {j}: imbalance ratio {ratio} must be >= 1"));
            }
            if !(rate > 0.0 && rate <= 1.0) {
                return bad(format!("head {j}: observation rate {rate} outside (0, 1]"));
            }
            let minority = self.positives_for(ratio).min(self.n_samples - self.positives_for(ratio));
            if minority < 2 {
                return bad(format!(
                    "head {j}: ratio {ratio} leaves {minority} minority samples out of {}",
                    self.n_samples
                ));
            }
        }
        Ok(())
    }

    pub fn generate<T: Scalar>(&self) -> Result<Dataset<T>> {
        generate_synthetic(self, &mut Rng::new(self.seed))
    }
}

fn gaussian<T: Scalar>(rows: usize, cols: usize, rng: &mut Rng) -> Matrix<T> {
    let mut m = Matrix::zeros(rows, cols);
    for v in m.data_mut() {
        *v = rng.normal();
    }
    m
}

pub fn generate_synthetic<T: Scalar>(spec: &SyntheticSpec, rng: &mut Rng) -> Result<Dataset<T>> {
    spec.validate()?;
    let (n, p, r, k) = (spec.n_samples, spec.n_features, spec.latent_rank, spec.n_heads());
    let mut feat_rng = rng.derive(0);
    let mut label_rng = rng.derive(1);
    let mut obs_rng = rng.derive(2);

    let latent: Matrix<T> = gaussian(n, r, &mut feat_rng);
    let mut loadings: Matrix<T> = gaussian(r, p, &mut feat_rng);
    loadings.scale_in_place(T::lit(1.0 / (r as f64).sqrt()));
    let mut features = latent.matmul(&loadings)?;
    let noise = T::lit(spec.noise_scale);
    for v in features.data_mut() {
        *v += noise * feat_rng.normal::<T>();
    }

    let mut labels = vec![None; n * k];
    for (j, &ratio) in spec.imbalance_ratios.iter().enumerate() {
        // q(h) = hᵀ Q h with Q = P·S·Pᵀ, S a random symmetric q×q matrix
        // and P a random r×q projection, so Q has rank `score_rank`.
        let q_rank = spec.score_rank;
        let g: Matrix<T> = gaussian(q_rank, q_rank, &mut label_rng);
        let proj: Matrix<T> = gaussian(r, q_rank, &mut label_rng);
        let scale = T::lit(0.5 / (q_rank as f64).sqrt());
        let mut sym = Matrix::zeros(q_rank, q_rank);
        for a in 0..q_rank {
            for b in 0..q_rank {
                sym.set(a, b, (g.get(a, b) + g.get(b, a)) * scale);
            }
        }
        let q = proj.matmul(&sym)?.matmul(&proj.transpose())?;
        let qh = latent.matmul(&q)?;
        let scores: Vec<f64> = (0..n)
            .map(|i| crate::matrix::dot(latent.row(i), qh.row(i)).as_f64())
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let n_pos = spec.positives_for(ratio);
        let mut head = vec![false; n];
        for &i in &order[..n_pos] {
            head[i] = true;
        }
        for (i, &y) in head.iter().enumerate() {
            let flipped = spec.label_noise > 0.0 && label_rng.bernoulli(spec.label_noise);
            labels[i * k + j] = Some(y ^ flipped);
        }
    }

    let full = labels.clone();
    for i in 0..n {
        let mut any = false;
        for (j, &rate) in spec.observation_rates.iter().enumerate() {
            if rate < 1.0 && !obs_rng.bernoulli(rate) {
                labels[i * k + j] = None;
            } else {
                any = true;
            }
        }
        if !any {
            let j = obs_rng.below(k);
            labels[i * k + j] = full[i * k + j];
        }
    }
    Dataset::with_default_names(features, HeadLabels::new(k, labels)?)
}
