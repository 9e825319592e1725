//! Dense statevector engine.
//!
//! States are immutable from the caller's view: every operation returns a new
//! [`StateVector`]. Operators need not be unitary; output distributions are the
//! globally renormalized squared amplitudes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::targets::Pmf;

pub const MAX_QUBITS: usize = 24;
pub const MAX_OP_ARITY: usize = 6;

/// Below this length the amplitude loops stay sequential.
const PAR_THRESHOLD: usize = 1 << 14;

pub type Matrix = DMatrix<Complex64>;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amps.len() != 1usize << n_qubits {
            return Err(Error::LengthMismatch { expected: 1 << n_qubits, got: amps.len() });
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub fn basis(n_qubits: usize, index: u64) -> Result<Self> {
        check_qubits(n_qubits)?;
        let len = 1usize << n_qubits;
        if index as usize >= len {
            return Err(Error::IndexOutOfRange { index: index as usize, n_qubits });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`.
    pub fn ghz(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let len = 1usize << n_qubits;
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[0] = a;
        amps[len - 1] = a;
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.amps[index as usize]
    }

    pub fn norm(&self) -> f64 {
        state_norm(self)
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::LengthMismatch { expected: self.n_qubits, got: other.n_qubits });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn scaled(&self, c: Complex64) -> StateVector {
        StateVector { n_qubits: self.n_qubits, amps: self.amps.iter().map(|a| a * c).collect() }
    }

    /// Largest entrywise deviation between two states of equal size.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        assert_eq!(self.n_qubits, other.n_qubits);
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, op: &LinearOp, targets: &[usize]) -> Result<StateVector> {
        apply_local_op(self, op, targets)
    }

    pub fn apply_in_place(&mut self, op: &LinearOp, targets: &[usize]) -> Result<()> {
        apply_local_op_in_place(self, op, targets)
    }

    /// Unnormalized projection `(⟨outcome|_measured ⊗ I)|ψ⟩` onto the
    /// remaining qubits, in their original order.
    pub fn project(&self, measured: &[usize], outcome: &BitString) -> Result<StateVector> {
        check_targets(self.n_qubits, measured)?;
        if outcome.len() != measured.len() {
            return Err(Error::LengthMismatch { expected: measured.len(), got: outcome.len() });
        }
        let n = self.n_qubits;
        let rest: Vec<usize> = (0..n).filter(|q| !measured.contains(q)).collect();
        if rest.is_empty() {
            return Err(Error::InvalidParameter("projection leaves no qubits".into()));
        }
        let mut fixed = 0usize;
        for (k, &q) in measured.iter().enumerate() {
            if outcome.get(k) {
                fixed |= 1 << (n - 1 - q);
            }
        }
        let r = rest.len();
        let amps = (0..1usize << r)
            .map(|j| {
                let mut idx = fixed;
                for (k, &q) in rest.iter().enumerate() {
                    if (j >> (r - 1 - k)) & 1 == 1 {
                        idx |= 1 << (n - 1 - q);
                    }
                }
                self.amps[idx]
            })
            .collect();
        StateVector::from_amplitudes(r, amps)
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n_qubits must be positive".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::SizeCap { what: "n_qubits", value: n as u128, cap: MAX_QUBITS as u128 });
    }
    Ok(())
}

fn check_targets(n: usize, targets: &[usize]) -> Result<()> {
    for (k, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(Error::IndexOutOfRange { index: t, n_qubits: n });
        }
        if targets[..k].contains(&t) {
            return Err(Error::DuplicateIndex(t));
        }
    }
    Ok(())
}

/// A dense operator on `arity` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOp {
    arity: usize,
    matrix: Matrix,
    unitary: bool,
}

impl LinearOp {
    /// Wrap a matrix; the unitarity flag is determined numerically.
    pub fn new(arity: usize, matrix: Matrix) -> Result<Self> {
        if arity == 0 || arity > MAX_OP_ARITY {
            return Err(Error::SizeCap { what: "arity", value: arity as u128, cap: MAX_OP_ARITY as u128 });
        }
        let dim = 1usize << arity;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::LengthMismatch { expected: dim, got: matrix.nrows().max(matrix.ncols()) });
        }
        let unitary = unitarity_deviation(&matrix) <= 1e-12;
        Ok(LinearOp { arity, matrix, unitary })
    }

    /// Build from the images of the basis states: `column(x) = M|x⟩`.
    pub fn from_columns(arity: usize, column: impl Fn(usize) -> Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << arity;
        let mut m = Matrix::zeros(dim, dim);
        for x in 0..dim {
            let col = column(x);
            if col.len() != dim {
                return Err(Error::LengthMismatch { expected: dim, got: col.len() });
            }
            for (r, v) in col.into_iter().enumerate() {
                m[(r, x)] = v;
            }
        }
        Self::new(arity, m)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> LinearOp {
        LinearOp { arity: self.arity, matrix: self.matrix.adjoint(), unitary: self.unitary }
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &LinearOp) -> Result<LinearOp> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: other.arity });
        }
        LinearOp::new(self.arity, &self.matrix * &other.matrix)
    }

    /// `self ⊗ other`, with `self` on the leading (more significant) qubits.
    pub fn kron(&self, other: &LinearOp) -> Result<LinearOp> {
        LinearOp::new(self.arity + other.arity, self.matrix.kronecker(&other.matrix))
    }

    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.matrix)
    }

    pub fn frobenius_distance(&self, other: &LinearOp) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }

    pub fn max_abs_distance(&self, other: &LinearOp) -> f64 {
        (&self.matrix - &other.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Spectral norm (largest singular value) of `self − other`.
    pub fn operator_distance(&self, other: &LinearOp) -> f64 {
        spectral_norm(&(&self.matrix - &other.matrix))
    }

    /// `min_φ ‖e^{iφ}·self − other‖_max`, evaluated at the phase that aligns
    /// the overall overlap `tr(self† other)`.
    pub fn phase_invariant_distance(&self, other: &LinearOp) -> f64 {
        phase_invariant_distance(&self.matrix, &other.matrix)
    }
}

pub fn spectral_norm(m: &Matrix) -> f64 {
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

pub fn unitarity_deviation(m: &Matrix) -> f64 {
    let g = m.adjoint() * m;
    let mut dev = 0.0f64;
    for r in 0..g.nrows() {
        for c in 0..g.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((g[(r, c)] - Complex64::new(target, 0.0)).norm());
        }
    }
    dev
}

pub fn phase_invariant_distance(a: &Matrix, b: &Matrix) -> f64 {
    let overlap: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 1e-300 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
    a.iter().zip(b.iter()).map(|(x, y)| (x * phase - y).norm()).fold(0.0, f64::max)
}

/// `(I ⊗ M ⊗ I)|ψ⟩` with `M` on `targets`; `targets[0]` carries the most
/// significant bit of the operator's local index.
pub fn apply_local_op(state: &StateVector, op: &LinearOp, targets: &[usize]) -> Result<StateVector> {
    let mut out = state.clone();
    apply_local_op_in_place(&mut out, op, targets)?;
    Ok(out)
}

/// In-place form of [`apply_local_op`].
pub fn apply_local_op_in_place(state: &mut StateVector, op: &LinearOp, targets: &[usize]) -> Result<()> {
    let n = state.n_qubits;
    if op.arity != targets.len() {
        return Err(Error::ArityMismatch { expected: op.arity, got: targets.len() });
    }
    check_targets(n, targets)?;
    let k = targets.len();
    let dim = 1usize << k;
    let positions: Vec<usize> = targets.iter().map(|&t| n - 1 - t).collect();
    // spread[j] places the bits of local index j onto the target positions.
    let spread: Vec<usize> = (0..dim)
        .map(|j| {
            positions
                .iter()
                .enumerate()
                .filter(|(t, _)| (j >> (k - 1 - t)) & 1 == 1)
                .map(|(_, &p)| 1usize << p)
                .sum()
        })
        .collect();
    // nonzero entries of each row
    let rows: Vec<Vec<(usize, Complex64)>> = (0..dim)
        .map(|r| (0..dim).filter_map(|c| {
            let e = op.matrix[(r, c)];
            (e.re != 0.0 || e.im != 0.0).then_some((c, e))
        }).collect())
        .collect();
    let mut sorted = positions.clone();
    sorted.sort_unstable();
    // every chunk of this size holds whole groups
    let chunk = 1usize << (sorted[k - 1] + 1);
    let groups_per_chunk = chunk >> k;
    let amps = &mut state.amps;
    let kernel = |block: &mut [Complex64]| {
        let mut local = vec![Complex64::new(0.0, 0.0); dim];
        for g in 0..groups_per_chunk {
            // insert zero bits at the target positions
            let base = sorted.iter().fold(g, |acc, &p| ((acc >> p) << (p + 1)) | (acc & ((1 << p) - 1)));
            for (j, &sp) in spread.iter().enumerate() {
                local[j] = block[base | sp];
            }
            for (r, row) in rows.iter().enumerate() {
                block[base | spread[r]] = row.iter().map(|&(c, e)| e * local[c]).sum();
            }
        }
    };
    if amps.len() >= PAR_THRESHOLD {
        amps.par_chunks_mut(chunk).for_each(kernel);
    } else {
        amps.chunks_mut(chunk).for_each(kernel);
    }
    Ok(())
}

pub fn state_norm(state: &StateVector) -> f64 {
    state.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn exact_distribution(state: &StateVector) -> Result<Pmf> {
    let norm2: f64 = state.amps.iter().map(|a| a.norm_sqr()).sum();
    if !(norm2 > 0.0) || !norm2.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let probs = state.amps.iter().map(|a| a.norm_sqr() / norm2).collect();
    Pmf::from_dense(state.n_qubits, probs)
}

/// Probability of observing `outcome` on `measured`, and the renormalized
/// state of the remaining qubits.
pub fn conditional_state(
    state: &StateVector,
    measured: &[usize],
    outcome: &BitString,
) -> Result<(f64, StateVector)> {
    let norm2 = state_norm(state).powi(2);
    if !(norm2 > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let residual = state.project(measured, outcome)?;
    let r2 = state_norm(&residual).powi(2);
    let prob = r2 / norm2;
    if r2 <= 0.0 {
        return Err(Error::ZeroProbability);
    }
    let scaled = residual.scaled(Complex64::new(1.0 / r2.sqrt(), 0.0));
    Ok((prob.min(1.0), scaled))
}
