#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use shallow_sampler::statekit::{LinearOp, StateVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(r: &mut impl Rng) -> f64 {
    r.sample(StandardNormal)
}

pub fn random_state(n: usize, r: &mut impl Rng) -> StateVector {
    let amps: Vec<Complex64> = (0..1usize << n).map(|_| Complex64::new(gaussian(r), gaussian(r))).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(n, amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

/// Haar-ish unitary from the QR factorization of a complex Gaussian matrix.
pub fn random_unitary(k: usize, r: &mut impl Rng) -> LinearOp {
    let dim = 1 << k;
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(gaussian(r), gaussian(r)));
    LinearOp::new(k, g.qr().q()).unwrap()
}

/// Full `2^n × 2^n` matrix of `op` acting on `targets` (first target is the
/// operator's most significant bit), built entry by entry.
pub fn embed(op: &LinearOp, targets: &[usize], n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let sub = |idx: usize| targets.iter().fold(0usize, |acc, &q| (acc << 1) | ((idx >> (n - 1 - q)) & 1));
    let mask: usize = targets.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    DMatrix::from_fn(dim, dim, |r, c| {
        if (r & !mask) != (c & !mask) {
            Complex64::new(0.0, 0.0)
        } else {
            op.entry(sub(r), sub(c))
        }
    })
}

pub fn as_vector(s: &StateVector) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(s.amplitudes())
}

pub fn max_abs(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
