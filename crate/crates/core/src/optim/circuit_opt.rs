use super::bfgs::{bfgs_minimize, Objective, OptResult, OptimizerConfig};
use crate::circuit::{Circuit, GateOp};
use crate::error::{invalid, Result};
use crate::quantum::QuantumState;

/// Figure of merit evaluated on the evolved state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateLoss {
    /// Off-diagonal weight in the computational basis.
    Coherence,
    /// `1 − <b|ρ|b>` for a fixed basis index `b`.
    Infidelity { basis: usize },
}

impl StateLoss {
    pub fn eval<S: QuantumState>(&self, state: &S) -> f64 {
        match *self {
            StateLoss::Coherence => state.coherence_loss(),
            StateLoss::Infidelity { basis } => 1.0 - state.populations()[basis],
        }
    }
}

/// `θ ↦ loss(U_C(θ) · input)`, with a central-difference gradient that keeps
/// the states before each gate so a probe only re-simulates the suffix.
pub struct CircuitObjective<'a, S> {
    circuit: &'a Circuit,
    input: &'a S,
    loss: StateLoss,
    // For each slot, the index of the gate that reads it.
    slot_op: Vec<usize>,
    prefix: Vec<S>,
    scratch: Vec<f64>,
}

impl<'a, S: QuantumState + Clone> CircuitObjective<'a, S> {
    pub fn new(circuit: &'a Circuit, input: &'a S, loss: StateLoss) -> Result<Self> {
        if circuit.n_qubits() != input.n_qubits() {
            return invalid(format!(
                "circuit on {} qubits, state on {}",
                circuit.n_qubits(),
                input.n_qubits()
            ));
        }
        if let StateLoss::Infidelity { basis } = loss {
            if basis >= 1 << circuit.n_qubits() {
                return invalid(format!("basis index {basis} out of range"));
            }
        }
        let mut slot_op = vec![0; circuit.n_params()];
        for (i, op) in circuit.ops().iter().enumerate() {
            for s in op.slots() {
                slot_op[s] = i;
            }
        }
        Ok(Self {
            circuit,
            input,
            loss,
            slot_op,
            prefix: Vec::new(),
            scratch: vec![0.0; circuit.n_params()],
        })
    }

    pub fn final_state(&self, params: &[f64]) -> S {
        let mut s = self.input.clone();
        for op in self.circuit.ops() {
            op.apply(params, &mut s);
        }
        s
    }

    fn suffix_loss(&self, from: usize, mut state: S, params: &[f64]) -> f64 {
        let ops: &[GateOp] = self.circuit.ops();
        for op in &ops[from..] {
            op.apply(params, &mut state);
        }
        self.loss.eval(&state)
    }
}

impl<S: QuantumState + Clone> Objective for CircuitObjective<'_, S> {
    fn value(&mut self, x: &[f64]) -> f64 {
        self.loss.eval(&self.final_state(x))
    }

    fn gradient(&mut self, x: &[f64], h: f64, grad: &mut [f64]) {
        let ops = self.circuit.ops();
        self.prefix.clear();
        let mut s = self.input.clone();
        for op in ops {
            self.prefix.push(s.clone());
            op.apply(x, &mut s);
        }
        let mut p = std::mem::take(&mut self.scratch);
        p.copy_from_slice(x);
        for slot in 0..x.len() {
            let i = self.slot_op[slot];
            p[slot] = x[slot] + h;
            let fp = self.suffix_loss(i, self.prefix[i].clone(), &p);
            p[slot] = x[slot] - h;
            let fm = self.suffix_loss(i, self.prefix[i].clone(), &p);
            p[slot] = x[slot];
            grad[slot] = (fp - fm) / (2.0 * h);
        }
        self.scratch = p;
    }
}

/// Result of fixing one action block's angles.
#[derive(Debug, Clone)]
pub struct LocalStep<S> {
    pub params: Vec<f64>,
    pub next_state: S,
    pub loss: f64,
}

/// Minimize the coherence loss of `block · state` over the block's own
/// parameters, starting from all-zero angles.
pub fn optimize_local_step<S: QuantumState + Clone>(
    block: &Circuit,
    state: &S,
    cfg: &OptimizerConfig,
) -> Result<LocalStep<S>> {
    let mut obj = CircuitObjective::new(block, state, StateLoss::Coherence)?;
    let x0 = vec![0.0; block.n_params()];
    let res = bfgs_minimize(&mut obj, &x0, cfg)?;
    let next_state = obj.final_state(&res.best_params);
    Ok(LocalStep {
        params: res.best_params,
        next_state,
        loss: res.best_value,
    })
}

/// Jointly re-optimize all angles of a finished circuit on the coherence
/// loss, starting from `x0` (the concatenated per-step solutions).
pub fn optimize_global<S: QuantumState + Clone>(
    c: &Circuit,
    target: &S,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptResult> {
    if x0.len() != c.n_params() {
        return invalid(format!(
            "initial point has {} entries, circuit has {} parameters",
            x0.len(),
            c.n_params()
        ));
    }
    let mut obj = CircuitObjective::new(c, target, StateLoss::Coherence)?;
    bfgs_minimize(&mut obj, x0, cfg)
}

/// Minimize `1 − <0|U_C ρ_T U_C†|0>`, i.e. maximize the fidelity of the
/// inverted circuit's output to the target.
pub fn optimize_fidelity<S: QuantumState + Clone>(
    c: &Circuit,
    target: &S,
    cfg: &OptimizerConfig,
) -> Result<OptResult> {
    let mut obj = CircuitObjective::new(c, target, StateLoss::Infidelity { basis: 0 })?;
    bfgs_minimize(&mut obj, &vec![0.0; c.n_params()], cfg)
}
