use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ir::GateOp;
use crate::error::{invalid, Error, Result};
use crate::quantum::MAX_QUBITS;

/// Undirected CNOT connectivity between qubits. Edges are stored as `(lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectivityGraph {
    n_qubits: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl ConnectivityGraph {
    /// Builds and validates the graph; it must be connected.
    pub fn new(n_qubits: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if !(2..=MAX_QUBITS).contains(&n_qubits) {
            return invalid(format!("connectivity graph needs 2..={MAX_QUBITS} qubits"));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n_qubits || b >= n_qubits {
                return invalid(format!("edge ({a},{b}) references a missing qubit"));
            }
            if a == b {
                return invalid(format!("self-loop on qubit {a}"));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let g = Self { n_qubits, edges: set };
        if !g.is_connected() {
            return Err(Error::Validation(
                "connectivity graph must be connected".into(),
            ));
        }
        Ok(g)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn degree(&self, q: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == q || b == q).count()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n_qubits];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(q) = stack.pop() {
            for &(a, b) in &self.edges {
                let other = if a == q {
                    b
                } else if b == q {
                    a
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    stack.push(other);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Every CNOT in `ops` acts on an edge of this graph.
    pub fn supports(&self, ops: &[GateOp]) -> bool {
        ops.iter().all(|op| match *op {
            GateOp::Cnot { control, target } => self.contains(control, target),
            _ => true,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphPreset {
    Unrestricted,
    Line,
    Manila,
    Quito,
}

impl FromStr for GraphPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unrestricted" | "full" | "all" => Ok(Self::Unrestricted),
            "line" => Ok(Self::Line),
            "manila" | "ibm_manila" => Ok(Self::Manila),
            "quito" | "ibm_quito" => Ok(Self::Quito),
            other => invalid(format!("unknown graph preset {other:?}")),
        }
    }
}

impl fmt::Display for GraphPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Unrestricted => "unrestricted",
            Self::Line => "line",
            Self::Manila => "manila",
            Self::Quito => "quito",
        })
    }
}

/// Named connectivity: all pairs, a nearest-neighbour line, or one of the
/// two 5-qubit device layouts (manila: a line; quito: a T shape around qubit 1).
pub fn preset_graph(preset: GraphPreset, n_qubits: usize) -> Result<ConnectivityGraph> {
    let edges: Vec<(usize, usize)> = match preset {
        GraphPreset::Unrestricted => (0..n_qubits)
            .flat_map(|a| (a + 1..n_qubits).map(move |b| (a, b)))
            .collect(),
        GraphPreset::Line => (1..n_qubits).map(|i| (i - 1, i)).collect(),
        GraphPreset::Manila | GraphPreset::Quito if n_qubits != 5 => {
            return invalid(format!("{preset} is a 5-qubit layout, got n={n_qubits}"));
        }
        GraphPreset::Manila => vec![(0, 1), (1, 2), (2, 3), (3, 4)],
        GraphPreset::Quito => vec![(0, 1), (1, 2), (1, 3), (3, 4)],
    };
    ConnectivityGraph::new(n_qubits, edges)
}
