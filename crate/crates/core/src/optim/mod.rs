//! Continuous angle optimization: multi-start BFGS and the circuit objectives.

mod bfgs;
mod circuit_opt;

pub use bfgs::{bfgs_minimize, central_difference, Objective, OptResult, OptimizerConfig};
pub use circuit_opt::{
    optimize_fidelity, optimize_global, optimize_local_step, CircuitObjective, LocalStep,
    StateLoss,
};
