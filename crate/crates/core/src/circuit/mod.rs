//! Circuit representation, connectivity, the agent's action space and circuit files.

mod actions;
mod export;
mod graph;
mod ir;

pub use actions::{action_block, build_action_set, Action, ActionSet};
pub use export::{
    export, export_str, format_sequence, import_json, ExportFormat, CIRCUIT_FORMAT,
    CIRCUIT_VERSION,
};
pub use graph::{preset_graph, ConnectivityGraph, GraphPreset};
pub use ir::{append_basis_correction, circuit_unitary, invert, invert_params, Circuit, GateOp};
