//! Soft-sensing toolkit built around the variance-weighted multi-headed
//! quality-driven autoencoder (VWMHQAE).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); class weights
//! can also be computed exactly over rationals. The aliases below fix the
//! scalar for everyday use.

pub mod activation;
pub mod adam;
pub mod data;
pub mod dense;
pub mod error;
pub mod gradcheck;
pub mod harness;
pub mod heads;
pub mod labels;
pub mod losses;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod smote;

pub use error::{Error, ErrorCategory, Result};
pub use scalar::Scalar;

pub type Matrix64 = matrix::Matrix<f64>;
pub type Matrix32 = matrix::Matrix<f32>;
pub type Dataset64 = data::Dataset<f64>;
pub type Dataset32 = data::Dataset<f32>;
pub type DenseLayer64 = dense::DenseLayer<f64>;
pub type QaeLayer64 = model::QaeLayer<f64>;
pub type StackedModel64 = model::StackedModel<f64>;
pub type StackedModel32 = model::StackedModel<f32>;
pub type Checkpoint64 = model::Checkpoint<f64>;
pub type ClassWeights64 = labels::ClassWeights<f64>;
/// Class weights as exact fractions `N / (2·N_h·n)`.
pub type ClassWeightsExact = labels::ClassWeights<num_rational::Rational64>;
