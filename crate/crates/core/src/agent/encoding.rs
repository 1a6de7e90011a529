use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quantum::{DensityMatrix, PureState, MAX_QUBITS};

/// Shape of the network input: the centred density matrix followed by one
/// `key_width`-wide key per past action, zero padded to `max_actions` keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderSpec {
    pub n_qubits: usize,
    pub d_out: usize,
    pub max_actions: usize,
    pub key_width: usize,
    /// Weight of the action-history segment.
    pub c_in: f64,
}

/// Bits needed to tell `d_out` indices apart (at least 1).
pub fn key_width_for(d_out: usize) -> usize {
    let mut w = 1;
    while (1usize << w) < d_out {
        w += 1;
    }
    w
}

impl EncoderSpec {
    pub fn new(n_qubits: usize, d_out: usize, max_actions: usize, c_in: f64) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return invalid(format!("encoder needs 1..={MAX_QUBITS} qubits"));
        }
        if d_out < 1 {
            return invalid("d_out must be positive");
        }
        if !c_in.is_finite() {
            return invalid("c_in must be finite");
        }
        Ok(Self {
            n_qubits,
            d_out,
            max_actions,
            key_width: key_width_for(d_out),
            c_in,
        })
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn d_in(&self) -> usize {
        2 * self.dim() * self.dim() + self.max_actions * self.key_width
    }

    pub fn with_c_in(mut self, c_in: f64) -> Self {
        self.c_in = c_in;
        self
    }

    fn check(&self, dim: usize, history: &[usize]) -> Result<()> {
        if dim != self.dim() {
            return invalid(format!("state dimension {dim}, encoder expects {}", self.dim()));
        }
        if history.len() > self.max_actions {
            return invalid(format!(
                "history of {} actions exceeds the limit of {}",
                history.len(),
                self.max_actions
            ));
        }
        Ok(())
    }

    fn push_history(&self, history: &[usize], out: &mut Vec<f64>) -> Result<()> {
        for &a in history {
            let key = action_key(a, self.key_width)?;
            if a >= self.d_out {
                return invalid(format!("action {a} out of range for {} outputs", self.d_out));
            }
            out.extend(key.iter().map(|k| self.c_in * k));
        }
        out.resize(self.d_in(), 0.0);
        Ok(())
    }
}

/// Binary key of action `i`, most-significant bit first, each bit `b`
/// mapped to `(2b − 1) / 2`.
pub fn action_key(i: usize, width: usize) -> Result<Vec<f64>> {
    if width == 0 || (width < usize::BITS as usize && i >> width != 0) {
        return invalid(format!("action {i} does not fit in {width} bits"));
    }
    Ok((0..width)
        .rev()
        .map(|k| if (i >> k) & 1 == 1 { 0.5 } else { -0.5 })
        .collect())
}

/// `[Re vec(ρ − I/d), Im vec(ρ − I/d), c_in·key(a_1), ..., 0...]`.
pub fn encode_input(rho: &DensityMatrix, history: &[usize], spec: &EncoderSpec) -> Result<Vec<f64>> {
    let d = rho.dim();
    spec.check(d, history)?;
    let mut out = Vec::with_capacity(spec.d_in());
    let m = rho.matrix().as_slice();
    let diag = 1.0 / d as f64;
    for i in 0..d {
        for j in 0..d {
            out.push(m[i * d + j].re - if i == j { diag } else { 0.0 });
        }
    }
    out.extend(m.iter().map(|z| z.im));
    spec.push_history(history, &mut out)?;
    Ok(out)
}

/// [`encode_input`] for `ρ = |ψ><ψ|` without forming the matrix.
pub fn encode_pure(psi: &PureState, history: &[usize], spec: &EncoderSpec) -> Result<Vec<f64>> {
    let d = psi.dim();
    spec.check(d, history)?;
    let a = psi.amplitudes();
    let mut out = vec![0.0; 2 * d * d];
    let diag = 1.0 / d as f64;
    for i in 0..d {
        for j in 0..d {
            let z = a[i] * a[j].conj();
            out[i * d + j] = z.re - if i == j { diag } else { 0.0 };
            out[d * d + i * d + j] = z.im;
        }
    }
    spec.push_history(history, &mut out)?;
    Ok(out)
}
