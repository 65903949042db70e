//! Costs, backpropagation, gradient descent, Adam and gradient checking.

mod backprop;
mod gradcheck;
mod loss;
mod optim;

pub use backprop::{
    backprop, backprop_batch, dataset_cost, full_batch_gradient, Gradients, LayerGradients,
};
pub use gradcheck::{grad_check, relative_error, GradCheckReport};
pub use loss::{cost, output_delta, softmax, LossKind};
pub use optim::{
    adam_step, gd_step, sgd_epoch, train_epoch, AdamState, EpochSummary, Hyperparams,
    OptimizerKind, OptimizerState,
};
