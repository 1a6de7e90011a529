//! Summary statistics for fidelity samples.

use serde::{Deserialize, Serialize};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Shortest closed interval `[lo, hi]` that contains at least
/// `ceil(coverage · N)` of the samples.
pub fn smallest_interval(xs: &[f64], coverage: f64) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = ((coverage * v.len() as f64).ceil() as usize).clamp(1, v.len());
    let mut best = (v[0], v[m - 1]);
    for i in 1..=v.len() - m {
        if v[i + m - 1] - v[i] < best.1 - best.0 {
            best = (v[i], v[i + m - 1]);
        }
    }
    best
}

/// One line of a comparison or evaluation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    /// What produced the samples, e.g. `agent` or `layered`.
    pub label: String,
    /// CNOT budget (agent) or layer count (layered); empty when unbounded.
    pub setting: Option<usize>,
    pub mean_cnots: f64,
    pub n_states: usize,
    pub mean_fidelity: f64,
    pub interval_lo: f64,
    pub interval_hi: f64,
}

impl SummaryRow {
    pub fn new(label: &str, setting: Option<usize>, fidelities: &[f64], cnots: &[usize]) -> Self {
        let (lo, hi) = smallest_interval(fidelities, 0.95);
        let c: Vec<f64> = cnots.iter().map(|&c| c as f64).collect();
        Self {
            label: label.into(),
            setting,
            mean_cnots: mean(&c),
            n_states: fidelities.len(),
            mean_fidelity: mean(fidelities),
            interval_lo: lo,
            interval_hi: hi,
        }
    }
}

pub fn write_summary_csv<W: std::io::Write>(rows: &[SummaryRow], out: W) -> crate::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
