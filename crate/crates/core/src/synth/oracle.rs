use serde::{Deserialize, Serialize};

use super::episode::{run_episode, EpisodeConfig, ScriptedPolicy};
use crate::circuit::{Action, ActionSet, ConnectivityGraph};
use crate::error::{Error, Result};
use crate::optim::OptimizerConfig;
use crate::par::{item_rng, par_map};
use crate::quantum::{PureState, QuantumState};

pub const ORACLE_MAX_QUBITS: usize = 4;
pub const ORACLE_MAX_CNOTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub local: OptimizerConfig,
    pub global: OptimizerConfig,
    pub seed: u64,
    /// Stop the search once a sequence reaches `F ≥ 1 − exact_tol`.
    pub exact_tol: f64,
    /// Worker threads; results do not depend on it.
    pub threads: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            local: OptimizerConfig {
                restarts: 1,
                ..Default::default()
            },
            global: OptimizerConfig {
                restarts: 4,
                ..Default::default()
            },
            seed: 0,
            exact_tol: 1e-9,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub cnots: usize,
    pub fidelity: f64,
    pub sequence: Vec<Action>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub fidelity: f64,
    pub sequence: Vec<Action>,
    /// Best result per exact length `0..=k`, as far as the search got.
    pub by_length: Vec<OracleRow>,
    pub evaluated: usize,
}

/// CNOT sequences up to commutation and direction. A CNOT between `a < b`
/// is listed once as `a-b`: the reversed gate equals it conjugated by
/// Hadamards, which the U3s on both sides absorb. Blocks on disjoint pairs
/// commute, so of two adjacent disjoint blocks only the ascending order is
/// kept.
pub fn candidate_sequences(graph: &ConnectivityGraph, len: usize) -> Vec<Vec<(usize, usize)>> {
    let edges: Vec<(usize, usize)> = graph.edges().map(|(a, b)| (a.min(b), a.max(b))).collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(edges: &[(usize, usize)], len: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for &e in edges {
            if let Some(&p) = cur.last() {
                let disjoint = p.0 != e.0 && p.0 != e.1 && p.1 != e.0 && p.1 != e.1;
                if disjoint && e < p {
                    continue;
                }
            }
            cur.push(e);
            rec(edges, len, cur, out);
            cur.pop();
        }
    }
    rec(&edges, len, &mut cur, &mut out);
    out
}

/// Best fidelity reachable with at most `max_cnots` CNOTs on `graph`, found
/// by optimizing every candidate sequence the way an episode would (local
/// steps, then joint re-optimization). Shorter sequences are tried first and
/// the first best wins ties.
pub fn brute_force_oracle(
    target: &PureState,
    max_cnots: usize,
    graph: &ConnectivityGraph,
    cfg: &OracleConfig,
) -> Result<OracleResult> {
    let n = target.n_qubits();
    if n > ORACLE_MAX_QUBITS || max_cnots > ORACLE_MAX_CNOTS {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive search is limited to n <= {ORACLE_MAX_QUBITS} and k <= {ORACLE_MAX_CNOTS} \
             (asked for n = {n}, k = {max_cnots})"
        )));
    }
    if graph.n_qubits() != n {
        return Err(Error::InvalidArgument(format!(
            "graph has {} qubits, target has {n}",
            graph.n_qubits()
        )));
    }
    let set = ActionSet::new(graph);
    let ep = EpisodeConfig {
        local: cfg.local,
        global: cfg.global,
        t_f: 1.0,
        c_r: 1.0,
        budget: None,
    };
    let mut best = OracleRow {
        cnots: 0,
        fidelity: f64::NEG_INFINITY,
        sequence: Vec::new(),
    };
    let mut by_length = Vec::new();
    let mut evaluated = 0;
    // Sequence i overall draws from its own stream, and each chunk is scanned
    // in order, so the answer is that of a sequential scan.
    let mut index = 0;
    'outer: for len in 0..=max_cnots {
        let mut row = OracleRow {
            cnots: len,
            fidelity: f64::NEG_INFINITY,
            sequence: Vec::new(),
        };
        let seqs: Vec<Vec<Action>> = candidate_sequences(graph, len)
            .into_iter()
            .map(|s| {
                s.into_iter()
                    .map(|(control, target)| Action::Cnot { control, target })
                    .collect()
            })
            .collect();
        let mut hit = false;
        for chunk in seqs.chunks(CHUNK) {
            let base = index;
            let fids = par_map(chunk, cfg.threads, |j, actions| -> Result<f64> {
                let mut policy = ScriptedPolicy::new(set.clone(), actions)?;
                Ok(run_episode(target, &mut policy, &ep, &mut item_rng(cfg.seed, base + j))?.fidelity)
            });
            index += chunk.len();
            for (actions, f) in chunk.iter().zip(fids) {
                let f = f?;
                evaluated += 1;
                if f > row.fidelity {
                    row.fidelity = f;
                    row.sequence = actions.clone();
                }
                if row.fidelity >= 1.0 - cfg.exact_tol {
                    hit = true;
                    break;
                }
            }
            if hit {
                break;
            }
        }
        if row.fidelity > best.fidelity {
            best = row.clone();
        }
        by_length.push(row);
        if best.fidelity >= 1.0 - cfg.exact_tol {
            break 'outer;
        }
    }
    Ok(OracleResult {
        fidelity: best.fidelity,
        sequence: best.sequence,
        by_length,
        evaluated,
    })
}

const CHUNK: usize = 64;
