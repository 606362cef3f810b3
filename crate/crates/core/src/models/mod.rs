//! The main-task model and every adversary variant, including the
//! class-conditional augmentation layer.

mod adversary;
mod augment;
mod main_model;
mod orthogonal;
mod variant;

pub use adversary::{AdversaryConfig, AdversaryGrads, AdversaryPass, AdversaryStack};
pub use augment::{
    decode_one_hot, one_hot, projector_spec, AugmentGrads, AugmentTrace, AugmentationLayer,
};
pub use main_model::{MainGrads, MainModel, MainModelConfig};
pub use orthogonal::{orthogonality_penalty, orthogonality_penalty_grad};
pub use variant::Variant;
