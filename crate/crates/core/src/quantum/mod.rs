//! Dense complex linear algebra, gates, state evolution and target sampling.

mod gates;
mod matrix;
mod sampling;
mod state;

pub use gates::{
    embed, gate_matrix, hadamard, mat2_mul, mat2_to_matrix, ry, rz, rzry, u3, GateKind, Mat2,
    PAULI_X,
};
pub use matrix::{ComplexMatrix, C64};
pub use sampling::{haar_state, sample_structured_state, sample_structured_target, QubitPartition};
pub use state::{
    closest_basis_state, coherence_loss, evolve, fidelity, fidelity_general, DensityMatrix,
    PureState, QuantumState, MAX_QUBITS,
};

pub(crate) use state::argmax_population;
