mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use shallow_sampler::gatezoo::*;
use shallow_sampler::statekit::{LinearOp, StateVector};
use shallow_sampler::BitString;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `e^{−iφX}|b⟩` as a 2-vector.
fn rotated_basis(phi: f64, b: usize) -> [Complex64; 2] {
    let (s, co) = phi.sin_cos();
    if b == 0 {
        [c(co), -I * s]
    } else {
        [-I * s, c(co)]
    }
}

/// `A_{m,θ}|x⟩ = ⊗_j e^{−iθX x_{j−1}}|x_j⟩`, built as a tensor product of 2-vectors.
fn a_multi_column(m: usize, theta: f64, x: usize) -> DVector<Complex64> {
    let bit = |j: usize| (x >> (m - 1 - j)) & 1;
    let mut v = DVector::from_element(1, c(1.0));
    for j in 0..m {
        let prev = bit((j + m - 1) % m);
        let f = rotated_basis(theta * prev as f64, bit(j));
        v = v.kronecker(&DVector::from_column_slice(&f));
    }
    v
}

#[test]
fn inner_products_exhaustive() {
    for m in 2..=4 {
        for theta in [0.1, 0.5, 1.0] {
            let dim = 1 << m;
            let cols: Vec<_> = (0..dim).map(|x| a_multi_column(m, theta, x)).collect();
            let a = a_multi(m, theta).unwrap();
            for x in 0..dim {
                for y in 0..dim {
                    assert!((a.entry(y, x) - cols[x][y]).norm() < 1e-12);
                    let ip = cols[y].dotc(&cols[x]);
                    let want = if x == y {
                        c(1.0)
                    } else if y == (dim - 1) ^ x {
                        let w = x.count_ones() as u32;
                        I.powu(m as u32 + 2 * w) * theta.sin().powi(m as i32)
                    } else {
                        c(0.0)
                    };
                    assert!((ip - want).norm() < 1e-12, "m={m} θ={theta} x={x} y={y}: {ip} vs {want}");
                    if y == (dim - 1) ^ x {
                        assert!((complement_overlap(m, theta, x) - want).norm() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn two_qubit_overlap_instance() {
    let ip = complement_overlap(2, PI / 4.0, 0);
    assert!((ip - c(-0.5)).norm() < 1e-15);
}

#[test]
fn unitarized_gate_properties() {
    for m in 2..=4 {
        for theta in [0.1, 0.5, 1.0, 0.05, 0.2, 0.3] {
            let u = u_unitarized(m, theta).unwrap();
            assert!(u.unitarity_deviation() < 1e-12, "m={m} θ={theta}");
            let a = a_multi(m, theta).unwrap();
            let dim = 1 << m;
            for x in 0..dim / 2 {
                for r in 0..dim {
                    assert!((u.entry(r, x) - a.entry(r, x)).norm() < 1e-15);
                }
            }
            // columns with x_1 = 1: (A|x⟩ − g A|x̄⟩)/C with g the complement overlap
            let cnorm = (1.0 - theta.sin().powi(2 * m as i32)).sqrt();
            for x in dim / 2..dim {
                let g = a_multi_column(m, theta, (dim - 1) ^ x).dotc(&a_multi_column(m, theta, x));
                for r in 0..dim {
                    let want = (a.entry(r, x) - g * a.entry(r, (dim - 1) ^ x)) / cnorm;
                    assert!((u.entry(r, x) - want).norm() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn unitarized_rejects_degenerate_angles() {
    assert!(u_unitarized(2, PI / 2.0).is_err());
    assert!(u_unitarized(1, 0.3).is_err());
    assert!(a_multi(1, 0.3).is_err());
}

#[test]
fn frobenius_gap_scales_like_theta_to_the_m() {
    // leading coefficient 2^{(m−1)/2}
    for m in 2..=4 {
        let lead = 2f64.powf((m as f64 - 1.0) / 2.0);
        for theta in [0.05, 0.1, 0.2, 0.3] {
            let d = u_unitarized(m, theta).unwrap().frobenius_distance(&a_multi(m, theta).unwrap());
            let ratio = d / theta.powi(m as i32);
            assert!(ratio <= lead + 1e-12 && ratio >= 0.9 * lead, "m={m} θ={theta} ratio={ratio}");
        }
    }
}

#[test]
fn cyclic_shift_moves_first_bit_last() {
    for m in 2..=5 {
        let cm = cyclic_shift(m).unwrap();
        for x in 0..1usize << m {
            let xb = BitString::from_index(x as u64, m);
            let mut shifted = xb.slice(1..m);
            shifted.push(xb.get(0));
            let y = shifted.index() as usize;
            for r in 0..1usize << m {
                let want = if r == y { 1.0 } else { 0.0 };
                assert_eq!(cm.entry(r, x), c(want));
            }
        }
    }
}

fn plus_state(k: usize) -> DVector<Complex64> {
    DVector::from_element(1 << k, c((0.5f64).powf(k as f64 / 2.0)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn single_rotation_identity(seed in any::<u64>(), theta in -1.5f64..1.5, x in 0usize..2) {
        let mut r = rng(seed);
        let psi = random_state(1, &mut r);
        let joint = StateVector::from_amplitudes(2, as_vector(&psi).kronecker(&plus_state(1)).iter().copied().collect()).unwrap();
        let after = joint
            .apply(&standard_gate(StandardGate::Cnot), &[1, 0]).unwrap()
            .apply(&a_theta(theta).adjoint(), &[1]).unwrap()
            .project(&[1], &BitString::from_index(x as u64, 1)).unwrap();
        let rot = x_rotation((theta + PI / 2.0) * x as f64);
        let want = psi.apply(&rot, &[0]).unwrap();
        // the projection carries an extra phase (−i)^x
        let phase = (-I).powu(x as u32) * FRAC_1_SQRT_2;
        prop_assert!(after.max_abs_diff(&want.scaled(phase)) < 1e-12);
    }

    #[test]
    fn block_rotation_matches_per_qubit(seed in any::<u64>(), theta in -1.5f64..1.5, m in 2usize..=3, xv in 0u64..8) {
        let x = BitString::from_index(xv % (1 << m), m);
        let mut r = rng(seed);
        let psi = random_state(1, &mut r);
        let start = StateVector::from_amplitudes(m + 1, plus_state(m).kronecker(&as_vector(&psi)).iter().copied().collect()).unwrap();
        let mut fanned = start.clone();
        for i in 0..m {
            fanned = fanned.apply(&standard_gate(StandardGate::Cnot), &[i, m]).unwrap();
        }
        let block = fanned.apply(&a_multi(m, theta).unwrap().adjoint(), &(0..m).collect::<Vec<_>>()).unwrap();
        let mut per = fanned.clone();
        for i in 0..m {
            per = per.apply(&a_theta(theta).adjoint(), &[i]).unwrap();
        }
        let measured: Vec<usize> = (0..m).collect();
        let lhs = block.project(&measured, &x).unwrap();
        let rhs = per.project(&measured, &x).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn x_rotation_is_unitary(theta in -10.0f64..10.0) {
        prop_assert!(x_rotation(theta).unitarity_deviation() < 1e-14);
    }
}

#[test]
fn gate_specs_build_expected_ops() {
    let spec = GateSpec::fanout(2);
    let op = spec.to_op().unwrap();
    assert_eq!(op.arity(), 3);
    // |1,0,0⟩ ↦ |1,1,1⟩
    assert_eq!(op.entry(0b111, 0b100), c(1.0));
    let m = GateSpec::single_qubit_matrix([[c(0.0), c(1.0)], [c(1.0), c(0.0)]]).to_op().unwrap();
    assert!(m.max_abs_distance(&standard_gate(StandardGate::X)) < 1e-15);
    assert!(standard_gate_by_name("NOPE").is_err());
    let back: GateSpec = serde_json::from_str(&serde_json::to_string(&GateSpec::u_unitarized(3, 0.2)).unwrap()).unwrap();
    assert_eq!(back, GateSpec::u_unitarized(3, 0.2));
    let id = LinearOp::new(1, DMatrix::identity(2, 2)).unwrap();
    assert!(a_theta(0.0).max_abs_distance(&id) < 1e-15);
}
