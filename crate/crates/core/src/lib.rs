//! Quality-of-service toolkit for free-space optical (FSO) links.
//!
//! * [`atmos`]: visibility-driven extinction (Kruse and Kim exponents),
//!   transmittance and dB attenuation.
//! * [`link`]: link-budget SNR.
//! * [`pca`]: standardization, covariance, Jacobi eigensolver, component
//!   selection and projection.
//! * [`mlp`]: one-hidden-layer perceptron trained by full-batch backpropagation.
//! * [`metrics`]: MAPE, MAE, RMSE and MSE.
//! * [`dataset`]: weather observation tables, a seeded synthetic generator,
//!   SNR targets and train/validation/test splits.
//! * [`pipeline`]: the PCA to neural-network SNR predictor.
//! * [`cli`]: batch command line emitting plot-ready CSV.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod atmos;
pub mod dataset;
pub mod error;
pub mod linalg;
pub mod link;
pub mod metrics;
pub mod mlp;
pub mod pca;
pub mod pipeline;

pub use error::{Error, Result};
pub mod cli;
