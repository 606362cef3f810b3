//! Minimax training of the main model against its adversary.

mod batches;
mod checkpoint;
mod config;
mod early_stop;
mod run;
mod step;

pub use batches::{balanced_weights, decoupled_batches, epoch_batches};
pub use checkpoint::{Checkpoint, EpochLog};
pub use config::TrainConfig;
pub use early_stop::{early_stop_select, EarlyStop, EarlyStopper};
pub use run::{evaluate_model, train};
pub use step::{main_step_grads, Batch, DiscBatch, MainStepGrads, StepLosses, Trainer};
