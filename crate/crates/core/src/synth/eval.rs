use serde::{Deserialize, Serialize};

use super::episode::{run_episode, AgentPolicy, EpisodeConfig};
use crate::agent::DdqnAgent;
use crate::circuit::format_sequence;
use crate::circuit::Action;
use crate::error::Result;
use crate::par::{item_rng, par_map};
use crate::quantum::PureState;
use crate::stats::{mean, smallest_interval, SummaryRow};

/// Greedy results on a batch of targets.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub budget: Option<usize>,
    pub fidelities: Vec<f64>,
    pub cnots: Vec<usize>,
    pub sequences: Vec<Vec<Action>>,
    pub failed: usize,
}

impl EvalReport {
    pub fn mean_fidelity(&self) -> f64 {
        mean(&self.fidelities)
    }

    /// Shortest interval holding 95% of the fidelities.
    pub fn interval(&self) -> (f64, f64) {
        smallest_interval(&self.fidelities, 0.95)
    }

    /// `hist[k]` is the number of targets that used `k` CNOTs.
    pub fn histogram(&self) -> Vec<usize> {
        let top = self.cnots.iter().copied().max().map_or(0, |m| m + 1);
        let mut h = vec![0; top];
        for &c in &self.cnots {
            h[c] += 1;
        }
        h
    }

    pub fn summary(&self, label: &str) -> SummaryRow {
        SummaryRow::new(label, self.budget, &self.fidelities, &self.cnots)
    }

    pub fn rows(&self) -> Vec<EvalRow> {
        self.fidelities
            .iter()
            .zip(&self.cnots)
            .zip(&self.sequences)
            .enumerate()
            .map(|(index, ((&fidelity, &cnots), seq))| EvalRow {
                index,
                fidelity,
                cnots,
                sequence: format_sequence(&cnot_pairs(seq)),
            })
            .collect()
    }
}

pub(crate) fn cnot_pairs(seq: &[Action]) -> Vec<(usize, usize)> {
    seq.iter()
        .filter_map(|a| match *a {
            Action::Cnot { control, target } => Some((control, target)),
            Action::Stop => None,
        })
        .collect()
}

/// Per-target line of an evaluation file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub index: usize,
    pub fidelity: f64,
    pub cnots: usize,
    /// `control-target` pairs separated by spaces.
    pub sequence: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub cnots: usize,
    pub count: usize,
}

pub fn write_csv<T: Serialize, W: std::io::Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn histogram_rows(hist: &[usize]) -> Vec<HistogramRow> {
    hist.iter()
        .enumerate()
        .map(|(cnots, &count)| HistogramRow { cnots, count })
        .collect()
}

/// Greedy episodes (ε = 0) on each target; the budget is enforced by the
/// legal-action mask. Target `i` gets its own generator derived from `seed`,
/// so the report does not depend on `threads`.
pub fn evaluate(
    agent: &DdqnAgent,
    targets: &[PureState],
    budget: Option<usize>,
    cfg: &EpisodeConfig,
    seed: u64,
    threads: usize,
) -> Result<EvalReport> {
    let cfg = EpisodeConfig { budget, ..*cfg };
    let recs = par_map(targets, threads, |i, t| {
        run_episode(t, &mut AgentPolicy { agent, eps: 0.0 }, &cfg, &mut item_rng(seed, i))
    });
    let mut rep = EvalReport {
        budget,
        fidelities: Vec::with_capacity(targets.len()),
        cnots: Vec::with_capacity(targets.len()),
        sequences: Vec::with_capacity(targets.len()),
        failed: 0,
    };
    for rec in recs {
        let rec = rec?;
        rep.failed += rec.failed as usize;
        rep.fidelities.push(rec.fidelity);
        rep.cnots.push(rec.cnots());
        rep.sequences.push(rec.sequence);
    }
    Ok(rep)
}
