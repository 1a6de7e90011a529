//! Circuit files.
//!
//! Text (for humans), one gate per line after a two-line header:
//!
//! ```text
//! # qubits=2 params=6 cnots=1
//! # sequence: 0-1
//! u3(0.1,0.2,0.3) 0
//! cx 0,1
//! ry(0.5) 1
//! x 1
//! ```
//!
//! JSON (lossless): `{"format":"qsynth-circuit","version":1,"n_qubits",
//! "n_params","ops":[{"op":"cx","control","target"} | {"op":"u3","qubit","slot"}
//! | ...],"params":[...]}`. Floats are written in shortest round-trip form, so
//! export → import → export is byte-identical.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ir::{Circuit, GateOp};
use crate::error::{invalid, Error, Result};

pub const CIRCUIT_FORMAT: &str = "qsynth-circuit";
pub const CIRCUIT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Text,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "txt" => Ok(Self::Text),
            "json" => Ok(Self::Json),
            other => invalid(format!("unknown export format {other:?}")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CircuitFile {
    format: String,
    version: u32,
    n_qubits: usize,
    n_params: usize,
    ops: Vec<GateOp>,
    params: Vec<f64>,
}

/// `"c-t, c-t, ..."` listing of CNOTs.
pub fn format_sequence(seq: &[(usize, usize)]) -> String {
    seq.iter()
        .map(|(c, t)| format!("{c}-{t}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn export(c: &Circuit, params: &[f64], format: ExportFormat) -> Result<Vec<u8>> {
    if params.len() != c.n_params() {
        return invalid(format!(
            "circuit has {} parameters, got {}",
            c.n_params(),
            params.len()
        ));
    }
    match format {
        ExportFormat::Text => Ok(export_text(c, params).into_bytes()),
        ExportFormat::Json => {
            let file = CircuitFile {
                format: CIRCUIT_FORMAT.into(),
                version: CIRCUIT_VERSION,
                n_qubits: c.n_qubits(),
                n_params: c.n_params(),
                ops: c.ops().to_vec(),
                params: params.to_vec(),
            };
            let mut out = serde_json::to_vec_pretty(&file)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

pub fn export_str(c: &Circuit, params: &[f64], format: &str) -> Result<Vec<u8>> {
    export(c, params, format.parse()?)
}

fn export_text(c: &Circuit, params: &[f64]) -> String {
    let mut s = String::new();
    let seq = c.cnot_sequence();
    let _ = writeln!(
        s,
        "# qubits={} params={} cnots={}",
        c.n_qubits(),
        c.n_params(),
        seq.len()
    );
    if seq.is_empty() {
        s.push_str("# sequence:\n");
    } else {
        let _ = writeln!(s, "# sequence: {}", format_sequence(&seq));
    }
    for op in c.ops() {
        let _ = match *op {
            GateOp::Cnot { control, target } => writeln!(s, "cx {control},{target}"),
            GateOp::X { qubit } => writeln!(s, "x {qubit}"),
            GateOp::U3 { qubit, slot } => writeln!(
                s,
                "u3({},{},{}) {qubit}",
                params[slot],
                params[slot + 1],
                params[slot + 2]
            ),
            GateOp::Ry { qubit, slot } => writeln!(s, "ry({}) {qubit}", params[slot]),
            GateOp::Rz { qubit, slot } => writeln!(s, "rz({}) {qubit}", params[slot]),
        };
    }
    s
}

/// Inverse of the JSON export.
pub fn import_json(bytes: &[u8]) -> Result<(Circuit, Vec<f64>)> {
    let file: CircuitFile = serde_json::from_slice(bytes)
        .map_err(|e| Error::Format(format!("not a circuit file: {e}")))?;
    if file.format != CIRCUIT_FORMAT {
        return Err(Error::Format(format!(
            "expected format {CIRCUIT_FORMAT:?}, found {:?}",
            file.format
        )));
    }
    if file.version != CIRCUIT_VERSION {
        return Err(Error::Format(format!(
            "unsupported circuit file version {}",
            file.version
        )));
    }
    if file.params.len() != file.n_params {
        return Err(Error::Format("parameter count does not match n_params".into()));
    }
    let c = Circuit::from_parts(file.n_qubits, file.ops, file.n_params)?;
    Ok((c, file.params))
}
