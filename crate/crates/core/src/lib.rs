#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Adversarial debiasing for equal opportunity.
//!
//! The crate bundles a small dense network engine ([`nn`]), the main-task
//! model together with every adversary variant including the class-conditional
//! augmentation layer ([`models`]), the minimax training loop ([`train`]), the
//! fairness evaluation stack ([`metrics`]), a synthetic biased-data generator
//! ([`data`]) and the sweep/report harness ([`experiment`]).
//!
//! Everything runs in `f64` and is deterministic given explicit seeds.

pub mod data;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod models;
pub mod nn;
pub mod rng;
pub mod train;

pub use data::{Dataset, JointSpec};
pub use error::{Error, Result};
pub use metrics::{CandidatePoint, EvalReport, PredictionSet};
pub use models::{AdversaryStack, AugmentationLayer, MainModel, Variant};
pub use nn::{Activation, Matrix, MlpParams, MlpSpec};
pub use train::{Checkpoint, EpochLog, TrainConfig};
