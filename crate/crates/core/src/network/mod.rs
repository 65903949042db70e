//! Network construction, activations, the forward pass and checkpoints.

mod activation;
pub mod checkpoint;
mod model;

pub use activation::{activate, activate_prime, ActivationKind};
pub use model::{predict_from_output, BatchTrace, ForwardTrace, Layer, LayerSpec, Network};
