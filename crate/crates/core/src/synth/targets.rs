use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantum::{haar_state, sample_structured_state, PureState, QubitPartition, C64};

/// How targets are drawn.
///
/// Text form (used in config files and on the command line): `haar`,
/// `separable`, `zero`, `mixed`, `mixed:<p>` or `partition:<sizes>` with
/// block sizes separated by commas, e.g. `partition:2,1,1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TargetStructure {
    /// Haar over all qubits.
    Haar,
    /// Product of single-qubit Haar states.
    Separable,
    /// `|0...0>`.
    Zero,
    /// Fully entangled with probability `p`, else a uniformly random partition.
    Mixed(f64),
    /// Haar blocks of the given sizes on shuffled wires.
    Partition(Vec<usize>),
}

impl Default for TargetStructure {
    fn default() -> Self {
        Self::Mixed(0.5)
    }
}

impl TargetStructure {
    pub fn sample<R: Rng + ?Sized>(&self, n_qubits: usize, rng: &mut R) -> Result<PureState> {
        match self {
            Self::Haar => haar_state(n_qubits, rng),
            Self::Zero => PureState::zero(n_qubits),
            Self::Separable => sample_structured_state(&QubitPartition::separable(n_qubits)?, rng),
            Self::Mixed(p) => {
                if rng.gen::<f64>() < *p {
                    haar_state(n_qubits, rng)
                } else {
                    sample_structured_state(&QubitPartition::random(n_qubits, rng)?, rng)
                }
            }
            Self::Partition(sizes) => {
                let part = QubitPartition::from_sizes(sizes)?;
                if part.n_qubits() != n_qubits {
                    return invalid(format!(
                        "partition covers {} qubits, expected {n_qubits}",
                        part.n_qubits()
                    ));
                }
                sample_structured_state(&part, rng)
            }
        }
    }
}

pub fn sample_targets<R: Rng + ?Sized>(
    structure: &TargetStructure,
    n_qubits: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<PureState>> {
    (0..count).map(|_| structure.sample(n_qubits, rng)).collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Amp {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TargetFile {
    List(Vec<Amp>),
    Object {
        amplitudes: Vec<Amp>,
    },
}

/// Tolerance on `| ||ψ||² − 1 |` for target files.
pub const TARGET_NORM_TOL: f64 = 1e-6;

/// Read a target state from JSON: a list of amplitudes, each a number or a
/// `[re, im]` pair, optionally wrapped as `{"amplitudes": [...]}`. The basis
/// order has qubit 0 as the most significant bit. The squared norm must be
/// within 1e-6 of 1; the state is then renormalized.
pub fn parse_target_json(bytes: &[u8]) -> Result<PureState> {
    let file: TargetFile = serde_json::from_slice(bytes)
        .map_err(|e| Error::Format(format!("not an amplitude list: {e}")))?;
    let (TargetFile::List(amps) | TargetFile::Object { amplitudes: amps }) = file;
    let amps: Vec<C64> = amps
        .into_iter()
        .map(|a| match a {
            Amp::Real(x) => C64::new(x, 0.0),
            Amp::Complex([re, im]) => C64::new(re, im),
        })
        .collect();
    if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::Validation("amplitudes must be finite".into()));
    }
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > TARGET_NORM_TOL {
        return Err(Error::Validation(format!(
            "target is not normalized: squared norm {norm} (tolerance {TARGET_NORM_TOL})"
        )));
    }
    PureState::normalized(amps)
}

impl FromStr for TargetStructure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s.as_str(), None),
        };
        match (head, arg) {
            ("haar" | "entangled", None) => Ok(Self::Haar),
            ("separable", None) => Ok(Self::Separable),
            ("zero", None) => Ok(Self::Zero),
            ("mixed", None) => Ok(Self::Mixed(0.5)),
            ("mixed", Some(p)) => {
                let p: f64 = p
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad probability {p:?}")))?;
                if !(0.0..=1.0).contains(&p) {
                    return invalid("mixed probability must lie in [0, 1]");
                }
                Ok(Self::Mixed(p))
            }
            ("partition", Some(list)) => {
                let sizes = list
                    .split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::InvalidArgument(format!("bad block size {x:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                QubitPartition::from_sizes(&sizes)?;
                Ok(Self::Partition(sizes))
            }
            _ => invalid(format!("unknown target structure {s:?}")),
        }
    }
}

impl TryFrom<String> for TargetStructure {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TargetStructure> for String {
    fn from(t: TargetStructure) -> String {
        t.to_string()
    }
}

impl fmt::Display for TargetStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Haar => f.write_str("haar"),
            Self::Separable => f.write_str("separable"),
            Self::Zero => f.write_str("zero"),
            Self::Mixed(p) => write!(f, "mixed:{p}"),
            Self::Partition(s) => {
                let parts: Vec<String> = s.iter().map(|x| x.to_string()).collect();
                write!(f, "partition:{}", parts.join(","))
            }
        }
    }
}
