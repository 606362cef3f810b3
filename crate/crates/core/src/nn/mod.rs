//! Dense network engine: matrices, MLPs with hand-written backprop, softmax
//! cross-entropy, gradient reversal, Adam and a plateau schedule.

mod adam;
mod loss;
mod matrix;
mod mlp;
mod reverse;
mod schedule;

pub use adam::AdamState;
pub use loss::{argmax_rows, softmax_xent};
pub use matrix::Matrix;
pub use mlp::{
    count_params, Activation, Dense, ForwardTrace, MlpGrads, MlpParams, MlpSpec, Tensors,
};
pub use reverse::{grad_reverse, GradientReversal};
pub use schedule::{Direction, PlateauSchedule};
