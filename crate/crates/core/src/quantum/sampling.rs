use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::matrix::{C64, ONE};
use super::state::{DensityMatrix, PureState, MAX_QUBITS};
use crate::error::{invalid, Result};

/// Haar-random pure state: a normalized vector of i.i.d. complex Gaussians.
pub fn haar_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<PureState> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return invalid(format!("qubit count {n_qubits} outside 1..={MAX_QUBITS}"));
    }
    let amps = (0..1usize << n_qubits)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    PureState::normalized(amps)
}

/// Disjoint blocks of qubits whose union is `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitPartition {
    n_qubits: usize,
    blocks: Vec<Vec<usize>>,
}

impl QubitPartition {
    pub fn new(n_qubits: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return invalid(format!("qubit count {n_qubits} outside 1..={MAX_QUBITS}"));
        }
        let mut seen = vec![false; n_qubits];
        for block in &blocks {
            if block.is_empty() {
                return invalid("partition blocks must be nonempty");
            }
            for &q in block {
                if q >= n_qubits {
                    return invalid(format!("qubit {q} out of range for {n_qubits} qubits"));
                }
                if std::mem::replace(&mut seen[q], true) {
                    return invalid(format!("qubit {q} appears in more than one block"));
                }
            }
        }
        if let Some(q) = seen.iter().position(|s| !s) {
            return invalid(format!("qubit {q} not covered by the partition"));
        }
        Ok(Self { n_qubits, blocks })
    }

    /// One block holding every qubit.
    pub fn entangled(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, vec![(0..n_qubits).collect()])
    }

    pub fn separable(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, (0..n_qubits).map(|q| vec![q]).collect())
    }

    /// Contiguous blocks with the given sizes, e.g. `[2, 1, 1]` → `{0,1},{2},{3}`.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        let mut next = 0;
        let blocks = sizes
            .iter()
            .map(|&s| {
                let b: Vec<usize> = (next..next + s).collect();
                next += s;
                b
            })
            .collect();
        Self::new(next, blocks)
    }

    /// Uniformly random set partition (each of the Bell-number partitions equally likely).
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Self> {
        // Enumerate restricted growth strings; n ≤ 10 keeps this at most 115975 entries.
        let mut all = Vec::new();
        let mut rgs = vec![0usize; n_qubits];
        fn rec(i: usize, max: usize, rgs: &mut Vec<usize>, all: &mut Vec<Vec<usize>>) {
            if i == rgs.len() {
                all.push(rgs.clone());
                return;
            }
            for v in 0..=max + 1 {
                rgs[i] = v;
                rec(i + 1, max.max(v), rgs, all);
            }
        }
        if n_qubits == 0 {
            return invalid("partition of zero qubits");
        }
        rgs[0] = 0;
        rec(1, 0, &mut rgs, &mut all);
        let pick = &all[rng.gen_range(0..all.len())];
        let n_blocks = pick.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); n_blocks];
        for (q, &b) in pick.iter().enumerate() {
            blocks[b].push(q);
        }
        Self::new(n_qubits, blocks)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }
}

/// Tensor product of independent Haar states on each block, with the qubit
/// positions then shuffled uniformly.
pub fn sample_structured_state<R: Rng + ?Sized>(
    partition: &QubitPartition,
    rng: &mut R,
) -> Result<PureState> {
    let n = partition.n_qubits;
    let factors = partition
        .blocks
        .iter()
        .map(|b| haar_state(b.len(), rng))
        .collect::<Result<Vec<_>>>()?;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    // Block qubit q is placed on wire perm[q].
    let dim = 1usize << n;
    let mut amps = vec![ONE; dim];
    for (x, amp) in amps.iter_mut().enumerate() {
        for (block, psi) in partition.blocks.iter().zip(&factors) {
            let k = block.len();
            let mut sub = 0;
            for (pos, &q) in block.iter().enumerate() {
                let wire = perm[q];
                if x & (1 << (n - 1 - wire)) != 0 {
                    sub |= 1 << (k - 1 - pos);
                }
            }
            *amp *= psi.amplitudes()[sub];
        }
    }
    PureState::normalized(amps)
}

pub fn sample_structured_target<R: Rng + ?Sized>(
    partition: &QubitPartition,
    rng: &mut R,
) -> Result<DensityMatrix> {
    Ok(sample_structured_state(partition, rng)?.to_density())
}
