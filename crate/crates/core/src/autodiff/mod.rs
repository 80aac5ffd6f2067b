//! Minimal reverse-mode differentiation and the neural layers built on it.

mod checkpoint;
mod gradcheck;
pub mod layers;
mod params;
mod sparse;
mod tape;

pub use checkpoint::{load_into, read_checkpoint, write_checkpoint, MAGIC as CHECKPOINT_MAGIC};
pub use gradcheck::{check_gradients, GradCheckReport};
pub use params::{AdamConfig, Binder, GradMap, Parameter, ParameterStore};
pub use sparse::SparseOp;
pub use tape::{Gradients, Tape, Var};
