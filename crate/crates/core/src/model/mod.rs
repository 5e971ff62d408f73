//! Baseline within-project defect classifier.
//!
//! A deep ReLU network with a sigmoid output, trained full-batch with Smooth
//! L1 loss and Adam on min-max normalized, undersampled training data.

mod adam;
mod loss;
mod network;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use loss::{smooth_l1, smooth_l1_grad, smooth_l1_loss};
pub use network::{init_network, sigmoid, Gradients, NetworkParams};
pub use train::{
    ablate, evaluate_predictions, split_dataset, train, undersample, AblationReport, AblationRow, Confusion,
    EvalMetrics, NormFit, TrainConfig, TrainOutcome, TrainedModel,
};
