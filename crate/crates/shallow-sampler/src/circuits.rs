//! Layered circuit representation, exact simulation, sampling, and the
//! builders for the majmod and pmmajmod circuits.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bintree::BalancedTree;
use crate::error::{Error, Result};
use crate::gatezoo::{GateSpec, StandardGate};
use crate::statekit::{exact_distribution, LinearOp, StateVector, MAX_QUBITS};
use crate::targets::{is_prime, Pmf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub gate: GateSpec,
    pub targets: Vec<usize>,
    #[serde(default)]
    pub adjoint: bool,
}

impl Placement {
    pub fn new(gate: GateSpec, targets: Vec<usize>) -> Self {
        Placement { gate, targets, adjoint: false }
    }

    pub fn adjoint(gate: GateSpec, targets: Vec<usize>) -> Self {
        Placement { gate, targets, adjoint: true }
    }
}

pub type Layer = Vec<Placement>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub layers: Vec<Layer>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::SizeCap { what: "n_qubits", value: n_qubits as u128, cap: MAX_QUBITS as u128 });
        }
        Ok(Circuit { n_qubits, layers: Vec::new() })
    }

    pub fn push_layer(&mut self, layer: Layer) -> Result<()> {
        check_layer(self.n_qubits, self.layers.len(), &layer)?;
        self.layers.push(layer);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::SizeCap { what: "n_qubits", value: self.n_qubits as u128, cap: MAX_QUBITS as u128 });
        }
        self.layers.iter().enumerate().try_for_each(|(i, l)| check_layer(self.n_qubits, i, l))
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn placements(&self) -> impl Iterator<Item = &Placement> {
        self.layers.iter().flatten()
    }

    /// Append the layers of `other`, which must act on the same qubits.
    pub fn extend(&mut self, other: Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::LengthMismatch { expected: self.n_qubits, got: other.n_qubits });
        }
        for layer in other.layers {
            self.push_layer(layer)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Circuit = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }
}

fn check_layer(n: usize, index: usize, layer: &Layer) -> Result<()> {
    let mut used = vec![false; n];
    for pl in layer {
        pl.gate.validate()?;
        if pl.gate.arity() != pl.targets.len() {
            return Err(Error::ArityMismatch { expected: pl.gate.arity(), got: pl.targets.len() });
        }
        for &q in &pl.targets {
            if q >= n {
                return Err(Error::IndexOutOfRange { index: q, n_qubits: n });
            }
            if std::mem::replace(&mut used[q], true) {
                return Err(Error::OverlappingTargets { layer: index, qubit: q });
            }
        }
    }
    Ok(())
}

pub fn depth_of(circuit: &Circuit) -> usize {
    circuit.depth()
}

/// Apply every layer to `input` and return the final (unnormalized) state.
pub fn simulate(circuit: &Circuit, input: &StateVector) -> Result<StateVector> {
    if input.n_qubits() != circuit.n_qubits {
        return Err(Error::LengthMismatch { expected: circuit.n_qubits, got: input.n_qubits() });
    }
    let mut cache: HashMap<String, LinearOp> = HashMap::new();
    let mut state = input.clone();
    for pl in circuit.placements() {
        let key = format!("{:?}/{}", pl.gate, pl.adjoint);
        if !cache.contains_key(&key) {
            let op = pl.gate.to_op()?;
            cache.insert(key.clone(), if pl.adjoint { op.adjoint() } else { op });
        }
        state.apply_in_place(&cache[&key], &pl.targets)?;
    }
    Ok(state)
}

pub fn run_exact(circuit: &Circuit, input: &StateVector) -> Result<Pmf> {
    exact_distribution(&simulate(circuit, input)?)
}

/// Outcomes as big-endian indices over `bit_length` bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Samples {
    pub bit_length: usize,
    pub outcomes: Vec<u64>,
}

impl Samples {
    pub fn empirical_pmf(&self) -> Result<Pmf> {
        let w = 1.0 / self.outcomes.len() as f64;
        Pmf::from_entries(self.bit_length, self.outcomes.iter().map(|&z| (z, w)))
    }
}

const SHOT_BATCH: usize = 1 << 16;

/// I.i.d. draws from `pmf`. Batch `b` uses ChaCha stream `b` of `seed`, so
/// the sequence does not depend on the thread count.
pub fn sample_pmf(pmf: &Pmf, shots: usize, seed: u64) -> Result<Samples> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be positive".into()));
    }
    let (keys, cdf): (Vec<u64>, Vec<f64>) = pmf
        .support()
        .scan(0.0, |acc, (k, p)| {
            *acc += p;
            Some((k, *acc))
        })
        .unzip();
    let total = *cdf.last().ok_or(Error::ZeroNorm)?;
    let batches = shots.div_ceil(SHOT_BATCH);
    let outcomes: Vec<u64> = (0..batches)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = SHOT_BATCH.min(shots - b * SHOT_BATCH);
            let (keys, cdf) = (&keys, &cdf);
            (0..len)
                .map(move |_| {
                    let u = rng.gen::<f64>() * total;
                    let i = cdf.partition_point(|&c| c <= u).min(keys.len() - 1);
                    keys[i]
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(Samples { bit_length: pmf.bit_length(), outcomes })
}

pub fn draw_samples(circuit: &Circuit, input: &StateVector, shots: usize, seed: u64) -> Result<Samples> {
    sample_pmf(&run_exact(circuit, input)?, shots, seed)
}

fn h_layer(qubits: impl IntoIterator<Item = usize>) -> Layer {
    qubits.into_iter().map(|q| Placement::new(GateSpec::standard(StandardGate::H), vec![q])).collect()
}

/// `|+⟩^{n−1}|0⟩` followed by `CNOT_{i,n}` for each `i < n`; produces the
/// uniform superposition over even-weight strings.
pub fn even_superposition_prep(n: usize) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidParameter("n must be at least 2".into()));
    }
    let mut c = Circuit::new(n)?;
    c.push_layer(h_layer(0..n - 1))?;
    for i in 0..n - 1 {
        c.push_layer(vec![Placement::new(GateSpec::standard(StandardGate::Cnot), vec![i, n - 1])])?;
    }
    Ok(c)
}

/// How the rotation layer acts on the `x` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rotation {
    /// `A_θ†` on each qubit.
    PerQubit,
    /// `A_{m,θ}†` blocks.
    Multi(usize),
    /// `U_{m,θ}†` blocks.
    Unitarized(usize),
}

/// Split `len` qubits into blocks of size `m`. A remainder of at least 2
/// becomes its own smaller block; a remainder of 1 is absorbed by reshaping
/// the last block so that every block has size at least 2.
pub fn block_sizes(len: usize, m: usize) -> Result<Vec<usize>> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("block size must be at least 2, got {m}")));
    }
    if len < 2 {
        return Err(Error::Incompatible(format!("cannot tile {len} qubits with blocks of size >= 2")));
    }
    let (q, r) = (len / m, len % m);
    let mut sizes = vec![m; q];
    match r {
        0 => {}
        1 if q == 0 => unreachable!("len >= 2"),
        1 if m == 2 => *sizes.last_mut().expect("q >= 1") = 3,
        1 => {
            sizes.pop();
            sizes.extend([m - 1, 2]);
        }
        _ => sizes.push(r),
    }
    Ok(sizes)
}

fn rotation_layer(qubits: &[usize], theta: f64, rotation: Rotation) -> Result<(Layer, Vec<Vec<usize>>)> {
    let mut layer = Vec::new();
    let mut blocks = Vec::new();
    match rotation {
        Rotation::PerQubit => {
            for &q in qubits {
                layer.push(Placement::adjoint(GateSpec::a_theta(theta), vec![q]));
            }
        }
        Rotation::Multi(m) | Rotation::Unitarized(m) => {
            let mut start = 0;
            for size in block_sizes(qubits.len(), m)? {
                let block = qubits[start..start + size].to_vec();
                start += size;
                let gate = match rotation {
                    Rotation::Multi(_) => GateSpec::a_multi(size, theta),
                    _ => GateSpec::u_unitarized(size, theta),
                };
                gate.to_op()?;
                layer.push(Placement::adjoint(gate, block.clone()));
                blocks.push(block);
            }
        }
    }
    Ok((layer, blocks))
}

fn check_majmod_args(n: usize, p: u64) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("n must be at least 3, got {n}")));
    }
    if p % 2 == 0 || !is_prime(p) {
        return Err(Error::NotOddPrime(p as i64));
    }
    Ok(())
}

/// Two layers after a GHZ input: `H` everywhere, then the rotation layer on
/// the first `n − 1` qubits and `e^{−iπX/4}` on the last.
pub fn majmod_circuit_with(n: usize, theta: f64, rotation: Rotation) -> Result<Circuit> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("n must be at least 3, got {n}")));
    }
    let mut c = Circuit::new(n)?;
    c.push_layer(h_layer(0..n))?;
    let xs: Vec<usize> = (0..n - 1).collect();
    let (mut layer, _) = rotation_layer(&xs, theta, rotation)?;
    layer.push(Placement::new(GateSpec::xrot(-PI / 4.0), vec![n - 1]));
    c.push_layer(layer)?;
    Ok(c)
}

pub fn nonunitary_majmod_circuit(n: usize, p: u64) -> Result<Circuit> {
    check_majmod_args(n, p)?;
    majmod_circuit_with(n, PI / p as f64, Rotation::PerQubit)
}

pub fn majmod_block_circuit(n: usize, p: u64, m: usize) -> Result<Circuit> {
    check_majmod_args(n, p)?;
    majmod_circuit_with(n, PI / p as f64, Rotation::Multi(m))
}

/// `⌈1/c + 1⌉`.
pub fn block_size_for_exponent(c: f64) -> Result<usize> {
    if !(c > 0.0 && c < 0.5) {
        return Err(Error::InvalidParameter(format!("exponent c = {c} outside (0, 1/2)")));
    }
    Ok((1.0 / c + 1.0).ceil() as usize)
}

/// Largest odd prime `≤ n^c`, or 3 when there is none.
pub fn prime_for_exponent(n: usize, c: f64) -> u64 {
    let bound = (n as f64).powf(c).floor() as u64;
    (3..=bound).rev().find(|&q| q % 2 == 1 && is_prime(q)).unwrap_or(3)
}

pub fn unitary_majmod_circuit_with(n: usize, p: u64, m: usize) -> Result<Circuit> {
    check_majmod_args(n, p)?;
    majmod_circuit_with(n, PI / p as f64, Rotation::Unitarized(m))
}

/// Unitarized majmod circuit with `m′ = ⌈1/c + 1⌉` and `p` from
/// [`prime_for_exponent`].
pub fn unitary_majmod_circuit(n: usize, c: f64) -> Result<Circuit> {
    let m = block_size_for_exponent(c)?;
    unitary_majmod_circuit_with(n, prime_for_exponent(n, c), m)
}

/// Qubit positions of the tree circuits: edges `e_1 … e_{n−1}`, then
/// vertices `v_1 … v_{n−1}`, then the root `v_0`.
#[derive(Clone, Copy, Debug)]
pub struct TreeLayout {
    pub n: usize,
}

impl TreeLayout {
    pub fn n_qubits(&self) -> usize {
        2 * self.n - 1
    }

    pub fn edge(&self, i: usize) -> usize {
        i - 1
    }

    pub fn vertex(&self, i: usize) -> usize {
        if i == 0 {
            2 * self.n - 2
        } else {
            self.n - 2 + i
        }
    }
}

fn incident_edges(tree: &BalancedTree, v: usize) -> Vec<usize> {
    let mut edges: Vec<usize> = if v > 0 { vec![v] } else { vec![] };
    edges.extend(tree.children(v));
    edges
}

/// Depth-3 Poor Man's GHZ preparation: `H` on the vertex qubits, then two
/// layers in which every vertex XORs itself into each incident edge qubit.
/// Vertices of even depth act in the first layer and odd depth in the second;
/// each vertex's CNOTs share a control and are grouped into one fan-out gate.
pub fn poor_mans_ghz_circuit(n: usize) -> Result<Circuit> {
    let tree = BalancedTree::new(n)?;
    let lay = TreeLayout { n };
    let mut c = Circuit::new(lay.n_qubits())?;
    c.push_layer(h_layer((0..n).map(|v| lay.vertex(v))))?;
    for parity in [0, 1] {
        let mut layer = Vec::new();
        for v in (0..n).filter(|&v| tree.depth(v) % 2 == parity) {
            let edges = incident_edges(&tree, v);
            let gate = if edges.len() == 1 { GateSpec::standard(StandardGate::Cnot) } else { GateSpec::fanout(edges.len()) };
            let mut targets = vec![lay.vertex(v)];
            targets.extend(edges.iter().map(|&e| lay.edge(e)));
            layer.push(Placement::new(gate, targets));
        }
        c.push_layer(layer)?;
    }
    Ok(c)
}

/// The same state built from 2-qubit CNOTs only. The CNOTs form the tree with
/// edges subdivided; colouring them greedily top-down uses max-degree colours.
pub fn poor_mans_ghz_circuit_two_qubit(n: usize) -> Result<Circuit> {
    BalancedTree::new(n)?;
    let lay = TreeLayout { n };
    let mut c = Circuit::new(lay.n_qubits())?;
    c.push_layer(h_layer((0..n).map(|v| lay.vertex(v))))?;
    let mut layers: Vec<(Vec<bool>, Layer)> = Vec::new();
    for e in 1..n {
        for v in [(e - 1) / 2, e] {
            let (ctrl, tgt) = (lay.vertex(v), lay.edge(e));
            let slot = layers.iter().position(|(busy, _)| !busy[ctrl] && !busy[tgt]).unwrap_or_else(|| {
                layers.push((vec![false; lay.n_qubits()], Vec::new()));
                layers.len() - 1
            });
            let (busy, layer) = &mut layers[slot];
            busy[ctrl] = true;
            busy[tgt] = true;
            layer.push(Placement::new(GateSpec::standard(StandardGate::Cnot), vec![ctrl, tgt]));
        }
    }
    for (_, layer) in layers {
        c.push_layer(layer)?;
    }
    Ok(c)
}

/// Poor Man's GHZ preparation followed by `H` on the vertex qubits, the
/// rotation layer on `v_1 … v_{n−1}` and `e^{−iπX/4}` on `v_0`. Block
/// rotations are followed by `C_m†` on each block. Output order is
/// `(d, x, y)`. Input is `|0…0⟩`.
pub fn pmmajmod_circuit_with(n: usize, p: u64, rotation: Rotation) -> Result<Circuit> {
    check_majmod_args(n, p)?;
    let lay = TreeLayout { n };
    let mut c = poor_mans_ghz_circuit(n)?;
    c.push_layer(h_layer((0..n).map(|v| lay.vertex(v))))?;
    let xs: Vec<usize> = (1..n).map(|v| lay.vertex(v)).collect();
    let (mut layer, blocks) = rotation_layer(&xs, PI / p as f64, rotation)?;
    layer.push(Placement::new(GateSpec::xrot(-PI / 4.0), vec![lay.vertex(0)]));
    c.push_layer(layer)?;
    if !blocks.is_empty() {
        c.push_layer(blocks.into_iter().map(|b| Placement::adjoint(GateSpec::cyclic(b.len()), b)).collect())?;
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SizeParam {
    Prime(u64),
    Exponent(f64),
}

/// With `Prime(p)` and `unitarized`, the block size uses `c = log_n p`.
pub fn pmmajmod_circuit(n: usize, param: SizeParam, unitarized: bool) -> Result<Circuit> {
    let (p, c) = match param {
        SizeParam::Prime(p) => (p, (p as f64).ln() / (n as f64).ln()),
        SizeParam::Exponent(c) => (prime_for_exponent(n, c), c),
    };
    if unitarized {
        let m = block_size_for_exponent(c.min(0.499_999))?;
        pmmajmod_circuit_with(n, p, Rotation::Unitarized(m))
    } else {
        pmmajmod_circuit_with(n, p, Rotation::PerQubit)
    }
}

/// Closed forms used for reporting.
pub mod reference {
    use super::*;
    use crate::bits::BitString;
    use crate::targets::{majmod_xor_parity, pmmajmod, signed_sum};
    use num_complex::Complex64;

    fn correct_prob(p: u64, s: i64) -> f64 {
        (-PI / 4.0 + PI * s as f64 / p as f64).cos().powi(2)
    }

    /// `2^{−(n−1)} Σ_x Pr[Y_x ≠ target(x)]` for the GHZ-input circuit.
    pub fn majmod_tvd(n: usize, p: u64) -> Result<f64> {
        let k = n - 1;
        let mut total = 0.0;
        for v in 0..1u64 << k {
            let x = BitString::from_index(v, k);
            let correct = correct_prob(p, x.weight() as i64);
            let parity_is_target = majmod_xor_parity(p, &x)? == x.parity();
            total += if parity_is_target { 1.0 - correct } else { correct };
        }
        Ok(total / (1u64 << k) as f64)
    }

    /// Same for the pmmajmod circuit, averaging over `(d, x)`.
    pub fn pmmajmod_tvd(n: usize, p: u64) -> Result<f64> {
        let tree = BalancedTree::new(n)?;
        let k = n - 1;
        let mut total = 0.0;
        for dv in 0..1u64 << k {
            let d = BitString::from_index(dv, k);
            for xv in 0..1u64 << k {
                let x = BitString::from_index(xv, k);
                let correct = correct_prob(p, signed_sum(&tree, &x, &d)?);
                let parity_is_target = pmmajmod(p, &tree, &x, &d)? == x.parity();
                total += if parity_is_target { 1.0 - correct } else { correct };
            }
        }
        Ok(total / (1u64 << (2 * k)) as f64)
    }

    /// `Σ_d 2^{−(n−1)/2}|d⟩ ⊗ (|h(d), 0⟩ + |h̄(d), 1⟩)/√2` in [`TreeLayout`] order.
    pub fn poor_mans_ghz_state(n: usize) -> Result<StateVector> {
        let tree = BalancedTree::new(n)?;
        let k = n - 1;
        let nq = 2 * n - 1;
        let amp = Complex64::new((0.5f64).powf(k as f64 / 2.0) * std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << nq];
        for dv in 0..1u64 << k {
            let h = tree.path_sums(&BitString::from_index(dv, k))?.index();
            let hbar = h ^ ((1 << k) - 1);
            amps[((dv << n) | (h << 1)) as usize] = amp;
            amps[((dv << n) | (hbar << 1) | 1) as usize] = amp;
        }
        StateVector::from_amplitudes(nq, amps)
    }

    /// `1/2 − 1/π + 1/(2p)`.
    pub fn asymptote(p: u64) -> f64 {
        0.5 - 1.0 / PI + 1.0 / (2.0 * p as f64)
    }

    /// The asymptote plus `p^{3/2} e^{−n/p²}`.
    pub fn majmod_tvd_bound(n: usize, p: u64) -> f64 {
        let pf = p as f64;
        asymptote(p) + pf.powf(1.5) * (-(n as f64) / (pf * pf)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;

    #[test]
    fn layers_reject_overlap() {
        let mut c = Circuit::new(3).unwrap();
        let layer = vec![
            Placement::new(GateSpec::standard(StandardGate::H), vec![0]),
            Placement::new(GateSpec::standard(StandardGate::Cnot), vec![1, 0]),
        ];
        assert!(matches!(c.push_layer(layer), Err(Error::OverlappingTargets { layer: 0, qubit: 0 })));
        let bad = vec![Placement::new(GateSpec::standard(StandardGate::Cnot), vec![1])];
        assert!(matches!(c.push_layer(bad), Err(Error::ArityMismatch { .. })));
        assert_eq!(depth_of(&c), 0);
    }

    #[test]
    fn identity_circuit_point_mass() {
        let c = Circuit::new(2).unwrap();
        let p = run_exact(&c, &StateVector::zero(2).unwrap()).unwrap();
        assert_eq!(p.prob(0), 1.0);
    }

    #[test]
    fn even_prep() {
        let c = even_superposition_prep(3).unwrap();
        let p = run_exact(&c, &StateVector::zero(3).unwrap()).unwrap();
        for z in 0..8u64 {
            let want = if z.count_ones() % 2 == 0 { 0.25 } else { 0.0 };
            assert!((p.prob(z) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn tilings() {
        assert_eq!(block_sizes(6, 3).unwrap(), vec![3, 3]);
        assert_eq!(block_sizes(6, 4).unwrap(), vec![4, 2]);
        assert_eq!(block_sizes(5, 4).unwrap(), vec![3, 2]);
        assert_eq!(block_sizes(5, 2).unwrap(), vec![2, 3]);
        assert_eq!(block_sizes(3, 4).unwrap(), vec![3]);
        assert!(block_sizes(1, 2).is_err());
        assert_eq!(block_size_for_exponent(0.45).unwrap(), 4);
        assert_eq!(prime_for_exponent(7, 0.45), 3);
        assert_eq!(prime_for_exponent(1000, 0.45), 19);
    }

    #[test]
    fn majmod_depths() {
        assert_eq!(depth_of(&nonunitary_majmod_circuit(5, 3).unwrap()), 2);
        assert!(nonunitary_majmod_circuit(5, 9).is_err());
        let u = unitary_majmod_circuit(7, 0.45).unwrap();
        assert_eq!(u.depth(), 2);
        for pl in u.placements() {
            assert!(pl.gate.to_op().unwrap().is_unitary());
        }
    }

    #[test]
    fn circuit_json_round_trip() {
        let c = pmmajmod_circuit_with(4, 3, Rotation::Unitarized(2)).unwrap();
        let back = Circuit::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn samples_are_reproducible() {
        let pmf = Pmf::from_entries(2, [(0, 0.5), (3, 0.5)]).unwrap();
        let a = sample_pmf(&pmf, 1000, 7).unwrap();
        let b = sample_pmf(&pmf, 1000, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.outcomes.iter().all(|&z| z == 0 || z == 3));
        let point = sample_pmf(&Pmf::point_mass(3, 5).unwrap(), 100, 1).unwrap();
        assert!(point.outcomes.iter().all(|&z| z == 5));
        assert!(sample_pmf(&pmf, 0, 1).is_err());
    }

    #[test]
    fn poor_mans_n2() {
        let c = poor_mans_ghz_circuit(2).unwrap();
        let s = simulate(&c, &StateVector::zero(3).unwrap()).unwrap();
        // (1/2)[|0⟩(|00⟩+|11⟩) + |1⟩(|10⟩+|01⟩)]
        for (z, want) in [(0b000, 0.5), (0b011, 0.5), (0b110, 0.5), (0b101, 0.5)] {
            assert!((s.amplitude(z).re - want).abs() < 1e-15);
        }
        assert!(s.max_abs_diff(&reference::poor_mans_ghz_state(2).unwrap()) < 1e-15);
    }

    #[test]
    fn two_qubit_variant_depth() {
        assert_eq!(poor_mans_ghz_circuit_two_qubit(4).unwrap().depth(), 3);
        assert_eq!(poor_mans_ghz_circuit_two_qubit(5).unwrap().depth(), 4);
        let s = simulate(&poor_mans_ghz_circuit_two_qubit(7).unwrap(), &StateVector::zero(13).unwrap()).unwrap();
        assert!(s.max_abs_diff(&reference::poor_mans_ghz_state(7).unwrap()) < 1e-12);
    }

    #[test]
    fn reference_tvd_value() {
        assert!((reference::majmod_tvd(5, 3).unwrap() - 0.202_303_767_449_099_23).abs() < 1e-12);
        let x = BitString::from_index(0, 2);
        assert_eq!(x.weight(), 0);
    }
}
