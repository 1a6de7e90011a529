//! Layered hardware-efficient ansätze for comparison at matched CNOT counts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{invert, invert_params, Circuit};
use crate::error::{invalid, Error, Result};
use crate::optim::{optimize_fidelity, OptimizerConfig};
use crate::quantum::PureState;
use crate::stats::SummaryRow;
use crate::synth::preparation_fidelity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    /// CNOTs `0-1, 1-2, ..., (n-2)-(n-1)`.
    Linear,
    /// CNOTs `0-1, 2-3, ...`, locals on the interior wires, then `1-2, 3-4, ...`.
    Pairwise,
}

/// Single-qubit gate used by the ansatz: `Rz·Ry` (2 angles) or a full U3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalGate {
    #[default]
    RzRy,
    U3,
}

impl FromStr for LayerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Self::Linear),
            "pairwise" => Ok(Self::Pairwise),
            other => invalid(format!("unknown layer kind {other:?}")),
        }
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Linear => "linear",
            Self::Pairwise => "pairwise",
        })
    }
}

impl FromStr for LocalGate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rzry" => Ok(Self::RzRy),
            "u3" => Ok(Self::U3),
            other => invalid(format!("unknown local gate {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayeredSpec {
    pub kind: LayerKind,
    pub n_qubits: usize,
    pub layers: usize,
    #[serde(default)]
    pub local_gate: LocalGate,
}

fn push_local(c: &mut Circuit, q: usize, gate: LocalGate) -> Result<()> {
    match gate {
        LocalGate::RzRy => {
            c.push_ry(q)?;
            c.push_rz(q)?;
        }
        LocalGate::U3 => {
            c.push_u3(q)?;
        }
    }
    Ok(())
}

/// State-preparation circuit: a local gate on every wire, then per layer the
/// entangling pattern followed by a local gate on every wire. Every CNOT is
/// a line edge, so each layer holds `n − 1` of them.
pub fn build_layered(spec: &LayeredSpec) -> Result<Circuit> {
    let n = spec.n_qubits;
    let mut c = Circuit::new(n)?;
    for q in 0..n {
        push_local(&mut c, q, spec.local_gate)?;
    }
    for _ in 0..spec.layers {
        match spec.kind {
            LayerKind::Linear => {
                for i in 0..n.saturating_sub(1) {
                    c.push_cnot(i, i + 1)?;
                }
            }
            LayerKind::Pairwise => {
                for i in (0..n.saturating_sub(1)).step_by(2) {
                    c.push_cnot(i, i + 1)?;
                }
                for q in 1..n.saturating_sub(1) {
                    push_local(&mut c, q, spec.local_gate)?;
                }
                for i in (1..n.saturating_sub(1)).step_by(2) {
                    c.push_cnot(i, i + 1)?;
                }
            }
        }
        for q in 0..n {
            push_local(&mut c, q, spec.local_gate)?;
        }
    }
    Ok(c)
}

#[derive(Debug, Clone)]
pub struct LayeredReport {
    pub spec: LayeredSpec,
    pub cnots: usize,
    pub fidelities: Vec<f64>,
}

impl LayeredReport {
    pub fn summary(&self, label: &str) -> SummaryRow {
        let cnots = vec![self.cnots; self.fidelities.len()];
        SummaryRow::new(label, Some(self.spec.layers), &self.fidelities, &cnots)
    }
}

/// Best preparation fidelity of the ansatz for each target. The angles are
/// found on the inverted circuit (target mapped towards `|0...0>`) and
/// converted back, so the reported value is that of the preparation circuit.
pub fn evaluate_layered(spec: &LayeredSpec, targets: &[PureState], cfg: &OptimizerConfig) -> Result<LayeredReport> {
    let prep = build_layered(spec)?;
    let diag = invert(&prep);
    let mut fidelities = Vec::with_capacity(targets.len());
    for (i, t) in targets.iter().enumerate() {
        let res = optimize_fidelity(&diag, t, &cfg.with_seed(cfg.seed.wrapping_add(i as u64)))?;
        let params = invert_params(&diag, &res.best_params)?;
        fidelities.push(preparation_fidelity(&prep, &params, t)?);
    }
    Ok(LayeredReport {
        spec: *spec,
        cnots: prep.cnot_count(),
        fidelities,
    })
}
