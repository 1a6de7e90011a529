use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{invalid, Result};

/// 2×2 single-qubit operator `[[a, b], [c, d]]`.
pub type Mat2 = [[C64; 2]; 2];

/// Gate families with a fixed matrix form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    U3,
    Ry,
    Rz,
    X,
    Cnot,
}

impl GateKind {
    pub fn n_params(self) -> usize {
        match self {
            GateKind::U3 => 3,
            GateKind::Ry | GateKind::Rz => 1,
            GateKind::X | GateKind::Cnot => 0,
        }
    }

    pub fn n_qubits(self) -> usize {
        match self {
            GateKind::Cnot => 2,
            _ => 1,
        }
    }
}

pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::new(c, 0.0), C64::new(-s, 0.0)],
        [C64::new(s, 0.0), C64::new(c, 0.0)],
    ]
}

pub fn rz(phi: f64) -> Mat2 {
    let (s, c) = (phi / 2.0).sin_cos();
    [[C64::new(c, -s), ZERO], [ZERO, C64::new(c, s)]]
}

/// `U3(θ, φ, λ) = Rz(φ) · Ry(θ) · Rz(λ)`.
pub fn u3(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (st, ct) = (theta / 2.0).sin_cos();
    let (sp, cp) = (phi / 2.0).sin_cos();
    let (sl, cl) = (lambda / 2.0).sin_cos();
    // e^{∓iφ/2}, e^{∓iλ/2}
    let ep_m = C64::new(cp, -sp);
    let ep_p = C64::new(cp, sp);
    let el_m = C64::new(cl, -sl);
    let el_p = C64::new(cl, sl);
    [
        [ep_m * el_m * ct, -(ep_m * el_p) * st],
        [ep_p * el_m * st, ep_p * el_p * ct],
    ]
}

/// `Rz(a) · Ry(b)`, the two-angle local gate used by layered ansätze.
pub fn rzry(a: f64, b: f64) -> Mat2 {
    mat2_mul(&rz(a), &ry(b))
}

pub const PAULI_X: Mat2 = [[ZERO, ONE], [ONE, ZERO]];

pub fn hadamard() -> Mat2 {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_to_matrix(m: &Mat2) -> ComplexMatrix {
    ComplexMatrix::from_vec(2, vec![m[0][0], m[0][1], m[1][0], m[1][1]])
        .expect("2x2 always valid")
}

/// Unitary of a gate family at the given angles (radians).
pub fn gate_matrix(kind: GateKind, params: &[f64]) -> Result<ComplexMatrix> {
    if params.len() != kind.n_params() {
        return invalid(format!(
            "{kind:?} takes {} parameters, got {}",
            kind.n_params(),
            params.len()
        ));
    }
    Ok(match kind {
        GateKind::U3 => mat2_to_matrix(&u3(params[0], params[1], params[2])),
        GateKind::Ry => mat2_to_matrix(&ry(params[0])),
        GateKind::Rz => mat2_to_matrix(&rz(params[0])),
        GateKind::X => mat2_to_matrix(&PAULI_X),
        GateKind::Cnot => {
            let mut m = ComplexMatrix::zeros(4);
            m[(0, 0)] = ONE;
            m[(1, 1)] = ONE;
            m[(2, 3)] = ONE;
            m[(3, 2)] = ONE;
            m
        }
    })
}

/// Lift `gate` acting on `qubits` (first listed = most significant bit of the
/// gate's own index) to the full `n`-qubit space. Qubit 0 is the most
/// significant bit of the global index.
pub fn embed(gate: &ComplexMatrix, qubits: &[usize], n: usize) -> Result<ComplexMatrix> {
    let k = qubits.len();
    if gate.dim() != 1 << k {
        return invalid(format!(
            "gate of dim {} cannot act on {k} qubits",
            gate.dim()
        ));
    }
    for (i, &q) in qubits.iter().enumerate() {
        if q >= n {
            return invalid(format!("qubit {q} out of range for {n} qubits"));
        }
        if qubits[..i].contains(&q) {
            return invalid(format!("qubit {q} listed twice"));
        }
    }
    let dim = 1usize << n;
    let masks: Vec<usize> = qubits.iter().map(|&q| 1 << (n - 1 - q)).collect();
    let all: usize = masks.iter().sum();
    let sub = |x: usize| {
        masks
            .iter()
            .fold(0usize, |acc, &m| (acc << 1) | usize::from(x & m != 0))
    };
    let mut out = ComplexMatrix::zeros(dim);
    for r in 0..dim {
        let rest = r & !all;
        let sr = sub(r);
        for sc in 0..gate.dim() {
            let g = gate[(sr, sc)];
            if g == ZERO {
                continue;
            }
            let mut c = rest;
            for (bit, &m) in masks.iter().enumerate() {
                if sc & (1 << (k - 1 - bit)) != 0 {
                    c |= m;
                }
            }
            out[(r, c)] = g;
        }
    }
    Ok(out)
}
