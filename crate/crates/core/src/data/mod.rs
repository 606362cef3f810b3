//! Datasets: a synthetic generator with controllable joint skew and group
//! leakage, CSV I/O, splitting and protected-label masking.

mod dataset;
mod generate;
mod io;
mod split;

pub use dataset::Dataset;
pub use generate::{generate, JointSpec};
pub use io::{load_csv, write_csv, write_csv_to};
pub use split::{mask_protected, split, split_indices};
