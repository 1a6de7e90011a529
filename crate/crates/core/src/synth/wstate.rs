use serde::{Deserialize, Serialize};

use super::episode::preparation_fidelity;
use crate::circuit::{invert, invert_params, Circuit};
use crate::error::{invalid, Result};
use crate::optim::{optimize_fidelity, OptimizerConfig};
use crate::quantum::{PureState, C64, MAX_QUBITS};

/// `(|10...0> + |01...0> + ... + |0...01>) / sqrt(n)`.
pub fn w_state(n: usize) -> Result<PureState> {
    if n == 0 || n > MAX_QUBITS {
        return invalid(format!("W state needs 1..={MAX_QUBITS} qubits"));
    }
    let mut a = vec![C64::new(0.0, 0.0); 1 << n];
    let v = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    for q in 0..n {
        a[1 << q] = v;
    }
    PureState::new(a)
}

/// `(|0...0> + |1...1>) / sqrt(2)`.
pub fn ghz_state(n: usize) -> Result<PureState> {
    if n == 0 || n > MAX_QUBITS {
        return invalid(format!("GHZ state needs 1..={MAX_QUBITS} qubits"));
    }
    let mut a = vec![C64::new(0.0, 0.0); 1 << n];
    a[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    a[(1 << n) - 1] = a[0];
    PureState::new(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LadderGate {
    #[default]
    Ry,
    U3,
}

/// Ladder that maps the n-qubit W state to `|0...0>` (the direction an
/// episode builds; invert it to prepare W): rotations on both wires
/// before every CNOT, down the chain `0-1, ..., (n-2)-(n-1)`, a second pass
/// `0-1, ..., (n-3)-(n-2)`, then a last rotation on every wire. For n = 4
/// the CNOTs are `0-1 1-2 2-3 0-1 1-2`. Uses `2n − 3` CNOTs.
pub fn wstate_ladder(n: usize, gate: LadderGate) -> Result<Circuit> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return invalid(format!("W ladder needs 2..={MAX_QUBITS} qubits, got {n}"));
    }
    let mut c = Circuit::new(n)?;
    let rot = |c: &mut Circuit, q: usize| -> Result<()> {
        match gate {
            LadderGate::Ry => c.push_ry(q).map(drop),
            LadderGate::U3 => c.push_u3(q).map(drop),
        }
    };
    let first = (0..n - 1).map(|i| (i, i + 1));
    let second = (0..n - 2).map(|i| (i, i + 1));
    for (ctl, tgt) in first.chain(second) {
        rot(&mut c, ctl)?;
        rot(&mut c, tgt)?;
        c.push_cnot(ctl, tgt)?;
    }
    for q in 0..n {
        rot(&mut c, q)?;
    }
    Ok(c)
}

#[derive(Debug, Clone)]
pub struct LadderResult {
    /// Preparation circuit, i.e. the inverted ladder: applied to `|0...0>`
    /// it gives the W state.
    pub circuit: Circuit,
    pub params: Vec<f64>,
    pub fidelity: f64,
}

/// Fix the ladder angles by maximizing the preparation fidelity to `W_n`.
/// Simulation runs on state vectors, so n = 10 stays cheap.
pub fn optimize_wstate_ladder(n: usize, gate: LadderGate, cfg: &OptimizerConfig) -> Result<LadderResult> {
    let diag = wstate_ladder(n, gate)?;
    let w = w_state(n)?;
    let prep = invert(&diag);
    let res = optimize_fidelity(&diag, &w, cfg)?;
    let params = invert_params(&diag, &res.best_params)?;
    let fidelity = preparation_fidelity(&prep, &params, &w)?;
    Ok(LadderResult {
        circuit: prep,
        params,
        fidelity,
    })
}
