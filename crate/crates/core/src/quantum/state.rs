use serde::{Deserialize, Serialize};

use super::gates::Mat2;
use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{invalid, Error, Result};

pub const MAX_QUBITS: usize = 10;

const NORM_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const EIGEN_FLOOR: f64 = -1e-9;

fn check_width(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return invalid(format!("qubit count {n} outside 1..={MAX_QUBITS}"));
    }
    Ok(())
}

fn width_of(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return invalid(format!("dimension {dim} is not a power of two"));
    }
    let n = dim.trailing_zeros() as usize;
    check_width(n)?;
    Ok(n)
}

/// In-place state evolution under the gates a circuit is built from.
pub trait QuantumState {
    fn n_qubits(&self) -> usize;
    fn apply_1q(&mut self, gate: &Mat2, qubit: usize);
    fn apply_cnot(&mut self, control: usize, target: usize);
    fn apply_x(&mut self, qubit: usize);
    /// Diagonal of the density matrix in the computational basis.
    fn populations(&self) -> Vec<f64>;
    /// Sum of squared moduli of the strictly upper off-diagonal entries.
    fn coherence_loss(&self) -> f64;
}

#[inline]
fn bit(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

/// Normalized state vector of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// Validates the norm within 1e-10.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        Self::with_tolerance(amps, NORM_TOL)
    }

    pub fn with_tolerance(amps: Vec<C64>, tol: f64) -> Result<Self> {
        let n_qubits = width_of(amps.len())?;
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > tol {
            return Err(Error::Validation(format!(
                "state has squared norm {norm2}, expected 1"
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Rescale an arbitrary nonzero vector to unit norm.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self> {
        let n_qubits = width_of(amps.len())?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_width(n_qubits)?;
        let dim = 1 << n_qubits;
        if index >= dim {
            return invalid(format!("basis index {index} out of range for {n_qubits} qubits"));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { n_qubits, amps })
    }

    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits,
            mat: ComplexMatrix::outer(&self.amps, &self.amps).expect("equal lengths"),
        }
    }

    pub fn apply_matrix(&self, u: &ComplexMatrix) -> Result<Self> {
        Ok(Self {
            n_qubits: self.n_qubits,
            amps: u.matvec(&self.amps)?,
        })
    }
}

impl QuantumState for PureState {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply_1q(&mut self, g: &Mat2, qubit: usize) {
        let stride = bit(self.n_qubits, qubit);
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + stride {
                let a0 = self.amps[i];
                let a1 = self.amps[i + stride];
                self.amps[i] = g[0][0] * a0 + g[0][1] * a1;
                self.amps[i + stride] = g[1][0] * a0 + g[1][1] * a1;
            }
            base += 2 * stride;
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cb = bit(self.n_qubits, control);
        let tb = bit(self.n_qubits, target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    fn apply_x(&mut self, qubit: usize) {
        let b = bit(self.n_qubits, qubit);
        for i in 0..self.amps.len() {
            if i & b == 0 {
                self.amps.swap(i, i | b);
            }
        }
    }

    fn populations(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn coherence_loss(&self) -> f64 {
        // Σ_{i<j} p_i p_j = ((Σp)² − Σp²) / 2 for ρ = |ψ><ψ|.
        let (s, s2) = self
            .amps
            .iter()
            .map(|a| a.norm_sqr())
            .fold((0.0, 0.0), |(s, s2), p| (s + p, s2 + p * p));
        (0.5 * (s * s - s2)).max(0.0)
    }
}

/// Density matrix of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let n_qubits = width_of(mat.dim())?;
        let rho = Self { n_qubits, mat };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn new_unchecked(n_qubits: usize, mat: ComplexMatrix) -> Self {
        Self { n_qubits, mat }
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.mat.hermiticity_error();
        if h > HERMITIAN_TOL {
            return Err(Error::Validation(format!("matrix not Hermitian (error {h:e})")));
        }
        let tr = self.mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Validation(format!("trace is {tr}, expected 1")));
        }
        let min = self.min_eigenvalue();
        if min < EIGEN_FLOOR {
            return Err(Error::Validation(format!(
                "matrix not positive semidefinite (eigenvalue {min:e})"
            )));
        }
        Ok(())
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        let d = 1usize << n_qubits;
        Ok(Self {
            n_qubits,
            mat: ComplexMatrix::diagonal(&vec![1.0 / d as f64; d]),
        })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::diagonal(diag))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ.
        self.mat.as_slice().iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = self.mat.hermitian_eigen();
        vals.into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Recover the state vector of a pure density matrix (up to global phase).
    pub fn to_pure(&self, tol: f64) -> Result<PureState> {
        let p = self.purity();
        if (p - 1.0).abs() > tol {
            return Err(Error::Validation(format!(
                "density matrix is not pure (purity {p})"
            )));
        }
        let d = self.dim();
        let j = (0..d)
            .max_by(|&a, &b| self.mat[(a, a)].re.total_cmp(&self.mat[(b, b)].re))
            .expect("nonempty");
        let scale = self.mat[(j, j)].re.sqrt();
        let amps = (0..d).map(|i| self.mat[(i, j)] / scale).collect();
        PureState::normalized(amps)
    }

    /// Reduced state on `keep` (ascending order preserved as given).
    pub fn partial_trace_keep(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.n_qubits;
        if keep.is_empty() || keep.iter().any(|&q| q >= n) {
            return invalid("partial trace needs a nonempty set of valid qubits");
        }
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let k = keep.len();
        let dk = 1usize << k;
        let compose = |sub: usize, env: usize| {
            let mut idx = 0;
            for (pos, &q) in keep.iter().enumerate() {
                if sub & (1 << (k - 1 - pos)) != 0 {
                    idx |= bit(n, q);
                }
            }
            for (pos, &q) in traced.iter().enumerate() {
                if env & (1 << (traced.len() - 1 - pos)) != 0 {
                    idx |= bit(n, q);
                }
            }
            idx
        };
        let mut out = ComplexMatrix::zeros(dk);
        for i in 0..dk {
            for j in 0..dk {
                let mut acc = ZERO;
                for e in 0..1usize << traced.len() {
                    acc += self.mat[(compose(i, e), compose(j, e))];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(DensityMatrix::new_unchecked(k, out))
    }
}

impl QuantumState for DensityMatrix {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply_1q(&mut self, g: &Mat2, qubit: usize) {
        let d = self.mat.dim();
        let stride = bit(self.n_qubits, qubit);
        let data = self.mat.as_mut_slice();
        // Rows: ρ ← G ρ.
        for i in 0..d {
            if i & stride != 0 {
                continue;
            }
            let (r0, r1) = (i * d, (i + stride) * d);
            for j in 0..d {
                let a0 = data[r0 + j];
                let a1 = data[r1 + j];
                data[r0 + j] = g[0][0] * a0 + g[0][1] * a1;
                data[r1 + j] = g[1][0] * a0 + g[1][1] * a1;
            }
        }
        // Columns: ρ ← ρ G†.
        let gc = [
            [g[0][0].conj(), g[0][1].conj()],
            [g[1][0].conj(), g[1][1].conj()],
        ];
        for row in data.chunks_exact_mut(d) {
            for j in 0..d {
                if j & stride != 0 {
                    continue;
                }
                let a0 = row[j];
                let a1 = row[j + stride];
                row[j] = gc[0][0] * a0 + gc[0][1] * a1;
                row[j + stride] = gc[1][0] * a0 + gc[1][1] * a1;
            }
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cb = bit(self.n_qubits, control);
        let tb = bit(self.n_qubits, target);
        let perm = |i: usize| if i & cb != 0 { i ^ tb } else { i };
        permute(&mut self.mat, perm);
    }

    fn apply_x(&mut self, qubit: usize) {
        let b = bit(self.n_qubits, qubit);
        permute(&mut self.mat, |i| i ^ b);
    }

    fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    fn coherence_loss(&self) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for j in i + 1..d {
                acc += self.mat[(i, j)].norm_sqr();
            }
        }
        acc
    }
}

/// ρ ← P ρ Pᵀ for an involutive basis permutation.
fn permute(m: &mut ComplexMatrix, perm: impl Fn(usize) -> usize) {
    let d = m.dim();
    let src = m.clone();
    for i in 0..d {
        let pi = perm(i);
        for j in 0..d {
            m[(pi, perm(j))] = src[(i, j)];
        }
    }
}

/// `U ρ U†`. `U` must be unitary within 1e-8.
pub fn evolve(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<DensityMatrix> {
    if u.dim() != rho.dim() {
        return invalid(format!(
            "unitary of dim {} applied to state of dim {}",
            u.dim(),
            rho.dim()
        ));
    }
    let err = u.unitarity_error();
    if err > 1e-8 {
        return invalid(format!("operator is not unitary (error {err:e})"));
    }
    let out = &(u * &rho.mat) * &u.adjoint();
    Ok(DensityMatrix::new_unchecked(rho.n_qubits, out))
}

/// `<ψ|ρ|ψ>`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return invalid(format!(
            "state dims differ: {} vs {}",
            rho.dim(),
            psi.dim()
        ));
    }
    let rpsi = rho.mat.matvec(&psi.amps)?;
    let f = psi
        .amps
        .iter()
        .zip(&rpsi)
        .map(|(a, b)| a.conj() * b)
        .sum::<C64>()
        .re;
    Ok(f.clamp(0.0, 1.0))
}

/// `sqrt(v)`, with eigenvalues at rounding level (relative to the largest)
/// treated as zero; their square roots would otherwise add ~1e-8.
fn root_above_noise(v: f64, all: &[f64]) -> f64 {
    let top = all.iter().copied().fold(0.0, f64::max);
    if v <= 1e-13 * top {
        0.0
    } else {
        v.sqrt()
    }
}

/// Square root of a PSD Hermitian matrix via its eigendecomposition.
fn psd_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    let (vals, vecs) = m.hermitian_eigen();
    let roots: Vec<f64> = vals.iter().map(|&v| root_above_noise(v, &vals)).collect();
    &(&vecs * &ComplexMatrix::diagonal(&roots)) * &vecs.adjoint()
}

/// Uhlmann fidelity `(tr sqrt(sqrt(ρ) σ sqrt(ρ)))²` between two mixed states.
pub fn fidelity_general(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return invalid(format!(
            "state dims differ: {} vs {}",
            rho.dim(),
            sigma.dim()
        ));
    }
    rho.validate()?;
    sigma.validate()?;
    let s = psd_sqrt(&rho.mat);
    let inner = &(&s * &sigma.mat) * &s;
    // Symmetrize against rounding before the second eigendecomposition.
    let sym = (&inner + &inner.adjoint()).scale(C64::new(0.5, 0.0));
    let (vals, _) = sym.hermitian_eigen();
    let tr: f64 = vals.iter().map(|&v| root_above_noise(v, &vals)).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// `L(ρ) = Σ_i Σ_{j>i} |ρ_ij|²`.
pub fn coherence_loss(rho: &DensityMatrix) -> f64 {
    rho.coherence_loss()
}

/// Index of the largest diagonal entry; ties go to the smallest index.
pub fn closest_basis_state(rho: &DensityMatrix) -> usize {
    argmax_population(&rho.populations())
}

pub(crate) fn argmax_population(pops: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in pops.iter().enumerate() {
        if p > pops[best] {
            best = i;
        }
    }
    best
}
