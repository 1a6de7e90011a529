use std::fmt;

use serde::{Deserialize, Serialize};

use super::graph::ConnectivityGraph;
use super::ir::{Circuit, GateOp};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Cnot { control: usize, target: usize },
    Stop,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Cnot { control, target } => write!(f, "{control}-{target}"),
            Action::Stop => f.write_str("stop"),
        }
    }
}

/// The agent's output space: every directed CNOT the graph allows, sorted by
/// `(control, target)`, followed by STOP.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSet {
    n_qubits: usize,
    actions: Vec<Action>,
}

impl ActionSet {
    pub fn new(graph: &ConnectivityGraph) -> Self {
        let mut cnots: Vec<(usize, usize)> = graph
            .edges()
            .flat_map(|(a, b)| [(a, b), (b, a)])
            .collect();
        cnots.sort_unstable();
        let mut actions: Vec<Action> = cnots
            .into_iter()
            .map(|(control, target)| Action::Cnot { control, target })
            .collect();
        actions.push(Action::Stop);
        Self {
            n_qubits: graph.n_qubits(),
            actions,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of network outputs.
    pub fn d_out(&self) -> usize {
        self.actions.len()
    }

    pub fn stop_index(&self) -> usize {
        self.actions.len() - 1
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn decode(&self, index: usize) -> Result<Action> {
        self.actions
            .get(index)
            .copied()
            .ok_or_else(|| crate::Error::InvalidArgument(format!("action index {index} out of range")))
    }

    pub fn encode(&self, action: Action) -> Result<usize> {
        match action {
            Action::Stop => Ok(self.stop_index()),
            Action::Cnot { .. } => self.actions[..self.stop_index()]
                .binary_search(&action)
                .map_err(|_| {
                    crate::Error::InvalidArgument(format!("{action} is not an allowed CNOT"))
                }),
        }
    }
}

pub fn build_action_set(graph: &ConnectivityGraph) -> ActionSet {
    ActionSet::new(graph)
}

/// `CNOT(c, t)` followed by U3 on the control then the target; six new slots
/// starting at `slot_base`.
pub fn action_block(action: Action, slot_base: usize) -> Result<Vec<GateOp>> {
    match action {
        Action::Stop => invalid("STOP has no gate block"),
        Action::Cnot { control, target } => Ok(vec![
            GateOp::Cnot { control, target },
            GateOp::U3 {
                qubit: control,
                slot: slot_base,
            },
            GateOp::U3 {
                qubit: target,
                slot: slot_base + 3,
            },
        ]),
    }
}

impl Circuit {
    /// Append the gate block of a CNOT action.
    pub fn push_action(&mut self, action: Action) -> Result<()> {
        let Action::Cnot { control, target } = action else {
            return invalid("STOP has no gate block");
        };
        self.push_cnot(control, target)?;
        self.push_u3(control)?;
        self.push_u3(target)?;
        Ok(())
    }

    /// Initial rotation layer followed by one block per CNOT.
    pub fn from_actions(n_qubits: usize, actions: &[Action]) -> Result<Circuit> {
        let mut c = Circuit::with_rotation_layer(n_qubits)?;
        for &a in actions {
            c.push_action(a)?;
        }
        Ok(c)
    }
}
