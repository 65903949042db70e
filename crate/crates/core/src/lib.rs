//! Fully connected feed-forward networks written from scratch: dense linear
//! algebra, backpropagation, minibatch SGD and Adam, MNIST IDX loading, and a
//! harness for sweeping depth, batch size and epoch count.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`, which is what the CLI
//! and the test suites use.
//!
//! ```
//! use depthnet::{ActivationKind, LayerSpec, Network64, Vector64};
//!
//! let net = Network64::build(3, &[LayerSpec::new(4, ActivationKind::Sigmoid)], 0).unwrap();
//! let out = net.output(&Vector64::from_vec(vec![0.1, 0.5, 0.9])).unwrap();
//! assert_eq!(out.len(), 4);
//! ```

// `!(x > 0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataio;
mod error;
pub mod experiment;
pub mod learning;
pub mod linalg;
pub mod network;
pub mod rng;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use dataio::{LabeledDataset, Minibatch, Mnist};
pub use experiment::{Preset, RunConfig, SweepRecord, TrainReport};
pub use learning::{Gradients, Hyperparams, LossKind, OptimizerKind};
pub use linalg::{Matrix, Vector};
pub use network::{ActivationKind, ForwardTrace, LayerSpec, Network};

pub type Matrix64 = Matrix<f64>;
pub type Vector64 = Vector<f64>;
pub type Network64 = Network<f64>;
pub type Gradients64 = Gradients<f64>;
pub type Dataset64 = LabeledDataset<f64>;

pub type Matrix32 = Matrix<f32>;
pub type Vector32 = Vector<f32>;
pub type Network32 = Network<f32>;
pub type Gradients32 = Gradients<f32>;
pub type Dataset32 = LabeledDataset<f32>;
