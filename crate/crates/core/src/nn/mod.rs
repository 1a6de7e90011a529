//! Small dense networks trained with Adam on a masked squared error.

mod adam;
mod mlp;

pub use adam::{train_batch, AdamState, TrainStats};
pub use mlp::{gradient_check, polyak, BatchGrad, Mlp, MlpFile, MLP_FORMAT, MLP_VERSION};
