use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantum::{
    embed, gate_matrix, ry, rz, u3, ComplexMatrix, GateKind, QuantumState, MAX_QUBITS,
};

/// One gate of a circuit. Parameterized gates read their angles from the
/// circuit's parameter vector starting at `slot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum GateOp {
    #[serde(rename = "cx")]
    Cnot { control: usize, target: usize },
    /// Consumes slots `slot..slot + 3` as `(θ, φ, λ)`.
    U3 { qubit: usize, slot: usize },
    Ry { qubit: usize, slot: usize },
    Rz { qubit: usize, slot: usize },
    X { qubit: usize },
}

impl GateOp {
    pub fn kind(&self) -> GateKind {
        match self {
            GateOp::Cnot { .. } => GateKind::Cnot,
            GateOp::U3 { .. } => GateKind::U3,
            GateOp::Ry { .. } => GateKind::Ry,
            GateOp::Rz { .. } => GateKind::Rz,
            GateOp::X { .. } => GateKind::X,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateOp::Cnot { control, target } => vec![control, target],
            GateOp::U3 { qubit, .. }
            | GateOp::Ry { qubit, .. }
            | GateOp::Rz { qubit, .. }
            | GateOp::X { qubit } => vec![qubit],
        }
    }

    /// Parameter slots this gate reads, if any.
    pub fn slots(&self) -> std::ops::Range<usize> {
        match *self {
            GateOp::U3 { slot, .. } => slot..slot + 3,
            GateOp::Ry { slot, .. } | GateOp::Rz { slot, .. } => slot..slot + 1,
            _ => 0..0,
        }
    }

    fn shifted(self, by: usize) -> Self {
        match self {
            GateOp::U3 { qubit, slot } => GateOp::U3 { qubit, slot: slot + by },
            GateOp::Ry { qubit, slot } => GateOp::Ry { qubit, slot: slot + by },
            GateOp::Rz { qubit, slot } => GateOp::Rz { qubit, slot: slot + by },
            other => other,
        }
    }

    /// Apply to a state with angles read from `params`.
    pub fn apply<S: QuantumState + ?Sized>(&self, params: &[f64], state: &mut S) {
        match *self {
            GateOp::Cnot { control, target } => state.apply_cnot(control, target),
            GateOp::X { qubit } => state.apply_x(qubit),
            GateOp::U3 { qubit, slot } => {
                state.apply_1q(&u3(params[slot], params[slot + 1], params[slot + 2]), qubit)
            }
            GateOp::Ry { qubit, slot } => state.apply_1q(&ry(params[slot]), qubit),
            GateOp::Rz { qubit, slot } => state.apply_1q(&rz(params[slot]), qubit),
        }
    }

    fn matrix(&self, params: &[f64], n: usize) -> Result<ComplexMatrix> {
        let local = match *self {
            GateOp::X { .. } => gate_matrix(GateKind::X, &[])?,
            GateOp::Cnot { .. } => gate_matrix(GateKind::Cnot, &[])?,
            _ => gate_matrix(self.kind(), &params[self.slots()])?,
        };
        embed(&local, &self.qubits(), n)
    }
}

/// Ordered gate sequence over `n_qubits` wires with `n_params` angle slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<GateOp>,
    n_params: usize,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return invalid(format!("qubit count {n_qubits} outside 1..={MAX_QUBITS}"));
        }
        Ok(Self {
            n_qubits,
            ops: Vec::new(),
            n_params: 0,
        })
    }

    /// Circuit with one U3 per qubit (3 slots each).
    pub fn with_rotation_layer(n_qubits: usize) -> Result<Self> {
        let mut c = Self::new(n_qubits)?;
        for q in 0..n_qubits {
            c.push_u3(q)?;
        }
        Ok(c)
    }

    /// Rebuild from parts, checking qubit ranges and that slot ranges are
    /// disjoint and cover `0..n_params`.
    pub fn from_parts(n_qubits: usize, ops: Vec<GateOp>, n_params: usize) -> Result<Self> {
        let mut c = Self::new(n_qubits)?;
        let mut used = vec![false; n_params];
        for op in &ops {
            c.check_op(op)?;
            for s in op.slots() {
                if s >= n_params {
                    return Err(Error::Validation(format!(
                        "slot {s} out of range for {n_params} parameters"
                    )));
                }
                if std::mem::replace(&mut used[s], true) {
                    return Err(Error::Validation(format!("slot {s} used twice")));
                }
            }
        }
        if let Some(s) = used.iter().position(|u| !u) {
            return Err(Error::Validation(format!("slot {s} unused")));
        }
        c.ops = ops;
        c.n_params = n_params;
        Ok(c)
    }

    fn check_op(&self, op: &GateOp) -> Result<()> {
        let qs = op.qubits();
        if let Some(q) = qs.iter().find(|&&q| q >= self.n_qubits) {
            return invalid(format!("qubit {q} out of range for {} qubits", self.n_qubits));
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return invalid("CNOT control and target must differ");
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        let op = GateOp::Cnot { control, target };
        self.check_op(&op)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn push_x(&mut self, qubit: usize) -> Result<()> {
        let op = GateOp::X { qubit };
        self.check_op(&op)?;
        self.ops.push(op);
        Ok(())
    }

    fn push_param(&mut self, op: GateOp) -> Result<usize> {
        self.check_op(&op)?;
        let slot = self.n_params;
        self.n_params += op.slots().len();
        self.ops.push(op);
        Ok(slot)
    }

    /// Returns the first slot of the new gate.
    pub fn push_u3(&mut self, qubit: usize) -> Result<usize> {
        let slot = self.n_params;
        self.push_param(GateOp::U3 { qubit, slot })
    }

    pub fn push_ry(&mut self, qubit: usize) -> Result<usize> {
        let slot = self.n_params;
        self.push_param(GateOp::Ry { qubit, slot })
    }

    pub fn push_rz(&mut self, qubit: usize) -> Result<usize> {
        let slot = self.n_params;
        self.push_param(GateOp::Rz { qubit, slot })
    }

    /// `self` followed by `other`, with `other`'s slots shifted past ours.
    pub fn concat(&self, other: &Circuit) -> Result<Circuit> {
        if self.n_qubits != other.n_qubits {
            return invalid("cannot concatenate circuits of different width");
        }
        let mut out = self.clone();
        out.ops
            .extend(other.ops.iter().map(|op| op.shifted(self.n_params)));
        out.n_params += other.n_params;
        Ok(out)
    }

    pub fn cnot_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, GateOp::Cnot { .. }))
            .count()
    }

    pub fn cnot_sequence(&self) -> Vec<(usize, usize)> {
        self.ops
            .iter()
            .filter_map(|op| match *op {
                GateOp::Cnot { control, target } => Some((control, target)),
                _ => None,
            })
            .collect()
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return invalid(format!(
                "circuit has {} parameters, got {}",
                self.n_params,
                params.len()
            ));
        }
        Ok(())
    }

    /// Ordered product of the embedded gate matrices (first gate rightmost).
    pub fn unitary(&self, params: &[f64]) -> Result<ComplexMatrix> {
        self.check_params(params)?;
        let mut u = ComplexMatrix::identity(1 << self.n_qubits);
        for op in &self.ops {
            u = op.matrix(params, self.n_qubits)?.matmul(&u)?;
        }
        Ok(u)
    }

    /// Evolve `state` through the circuit in place.
    pub fn apply<S: QuantumState + ?Sized>(&self, params: &[f64], state: &mut S) -> Result<()> {
        self.check_params(params)?;
        if state.n_qubits() != self.n_qubits {
            return invalid(format!(
                "circuit on {} qubits applied to {}-qubit state",
                self.n_qubits,
                state.n_qubits()
            ));
        }
        for op in &self.ops {
            op.apply(params, state);
        }
        Ok(())
    }
}

pub fn circuit_unitary(c: &Circuit, params: &[f64]) -> Result<ComplexMatrix> {
    c.unitary(params)
}

/// Reverse gate order; gates keep their slots so the inverse is an
/// involution on structure. Use [`invert_params`] for the matching angles.
pub fn invert(c: &Circuit) -> Circuit {
    Circuit {
        n_qubits: c.n_qubits,
        ops: c.ops.iter().rev().copied().collect(),
        n_params: c.n_params,
    }
}

/// Angles of `invert(c)` such that its unitary is the inverse of `c`'s:
/// `U3(θ, φ, λ)⁻¹ = U3(−θ, −λ, −φ)` and single rotations are negated.
pub fn invert_params(c: &Circuit, params: &[f64]) -> Result<Vec<f64>> {
    c.check_params(params)?;
    let mut out = params.to_vec();
    for op in &c.ops {
        match *op {
            GateOp::U3 { slot, .. } => {
                out[slot] = -params[slot];
                out[slot + 1] = -params[slot + 2];
                out[slot + 2] = -params[slot + 1];
            }
            GateOp::Ry { slot, .. } | GateOp::Rz { slot, .. } => out[slot] = -params[slot],
            _ => {}
        }
    }
    Ok(out)
}

/// Append X on every qubit whose bit in `b` is set, mapping `|b>` to `|0>`.
pub fn append_basis_correction(c: &Circuit, b: usize) -> Result<Circuit> {
    let n = c.n_qubits;
    if b >= 1 << n {
        return invalid(format!("basis index {b} out of range for {n} qubits"));
    }
    let mut out = c.clone();
    for q in 0..n {
        if b & (1 << (n - 1 - q)) != 0 {
            out.push_x(q)?;
        }
    }
    Ok(out)
}
