//! Synthesis of short CNOT + local-unitary circuits for quantum state preparation.
//!
//! An agent (a double deep Q-network) picks the entangling gates one at a time
//! while BFGS fixes the continuous angles of the local unitaries around them.
//! The continuous objective is the coherence loss: the squared magnitude of the
//! off-diagonal entries of the evolving density matrix. A circuit that
//! diagonalizes the target, followed by X corrections and inversion, prepares
//! the target from `|0...0>`.
//!
//! Basis convention: qubit 0 is the most-significant bit of a basis index, so
//! on two qubits `|q0 q1>` with index `2*q0 + q1`.

pub mod agent;
pub mod baseline;
pub mod circuit;
pub mod error;
pub mod nn;
pub mod optim;
pub mod par;
pub mod quantum;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
