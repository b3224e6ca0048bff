//! FiLM-modulated radial-basis network layers with exact hand-derived
//! gradients, plus everything needed to train and inspect them: a dense/ReLU
//! baseline, an AdamW optimizer, dataset generators and IDX ingestion, a
//! deterministic experiment harness, and closed-form extraction of
//! per-feature contribution functions.
//!
//! The numeric core is generic over the scalar type (`f32` or `f64`) through
//! the [`Scalar`] trait; the aliases at the crate root fix `f64`, which is
//! what the harness and CLI use.
//!
//! # Quick start
//!
//! ```
//! use mjkan::{Matrix, MjkanLayer, RbfBasis};
//!
//! let basis = RbfBasis::new_uniform(5, -3.0, 3.0, 1.0).unwrap();
//! let layer = MjkanLayer::init(2, 4, basis, true, 1.0, 42).unwrap();
//! let x = Matrix::from_vec(1, 2, vec![0.3, -1.2]).unwrap();
//! let (y, cache) = layer.forward(&x).unwrap();
//! let d_y = Matrix::from_vec(1, 4, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
//! let (grads, d_x) = layer.backward(&cache, &d_y).unwrap();
//! assert_eq!(y.shape(), (1, 4));
//! assert_eq!(d_x.shape(), (1, 2));
//! assert_eq!(grads.gamma.shape(), (2, 5, 4));
//! ```

pub mod checkpoint;
pub mod data;
pub mod error;
pub mod harness;
pub mod layer;
pub mod loss;
pub mod model;
pub mod num;
pub mod optim;
pub mod rbf;
pub mod symbolic;
pub mod tensor;

pub use error::{Error, Result};
pub use num::Scalar;

pub use layer::{kan_param_count, mlp_param_count};

/// Dense row-major matrix over the default `f64` scalar.
pub type Matrix = tensor::Matrix<f64>;
/// Rank-3 array over the default `f64` scalar.
pub type Tensor3 = tensor::Tensor3<f64>;
/// Gaussian RBF basis over the default `f64` scalar.
pub type RbfBasis = rbf::RbfBasis<f64>;
/// MJKAN layer over the default `f64` scalar.
pub type MjkanLayer = layer::MjkanLayer<f64>;
/// Dense affine layer over the default `f64` scalar.
pub type DenseLayer = model::DenseLayer<f64>;
/// Layer-stack container over the default `f64` scalar.
pub type SequentialModel = model::SequentialModel<f64>;
/// Extracted closed-form model over the default `f64` scalar.
pub type SymbolicModel = symbolic::SymbolicModel<f64>;
/// AdamW optimizer over the default `f64` scalar.
pub type AdamW = optim::AdamW<f64>;
/// AdamW hyperparameters over the default `f64` scalar.
pub type AdamWConfig = optim::AdamWConfig<f64>;
