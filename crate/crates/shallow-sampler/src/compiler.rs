//! Exact synthesis of small unitaries into single-qubit gates and CNOTs:
//! two-level factorization, Gray-code routing, and recursive expansion of
//! multiply-controlled single-qubit gates. Global phase is dropped.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuits::{Circuit, Placement};
use crate::error::{Error, Result};
use crate::gatezoo::{GateFamily, GateSpec, StandardGate};
use crate::statekit::{phase_invariant_distance, LinearOp, Matrix, StateVector};

pub const MAX_COMPILE_ARITY: usize = 4;
const UNITARY_TOL: f64 = 1e-10;
const NEGLIGIBLE: f64 = 1e-15;
const EXACT_MATCH: f64 = 1e-12;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub type Mat2 = [[Complex64; 2]; 2];

const PAULI_X: Mat2 = [[ZERO, ONE], [ONE, ZERO]];

fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

fn adjoint2(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn diag2(a: Complex64, b: Complex64) -> Mat2 {
    [[a, ZERO], [ZERO, b]]
}

/// Distance from the nearest multiple of the identity by a unit phase.
fn scalar_distance(a: &Mat2) -> f64 {
    let tr = a[0][0] + a[1][1];
    let phase = if tr.norm() > NEGLIGIBLE { tr / tr.norm() } else { ONE };
    [(a[0][0] - phase).norm(), a[0][1].norm(), a[1][0].norm(), (a[1][1] - phase).norm()]
        .into_iter()
        .fold(0.0, f64::max)
}

fn max_dist2(a: &Mat2, b: &Mat2) -> f64 {
    (0..4).map(|k| (a[k / 2][k % 2] - b[k / 2][k % 2]).norm()).fold(0.0, f64::max)
}

fn rz(t: f64) -> Mat2 {
    diag2(Complex64::from_polar(1.0, -t / 2.0), Complex64::from_polar(1.0, t / 2.0))
}

fn ry(t: f64) -> Mat2 {
    let (s, c) = (t / 2.0).sin_cos();
    [[c.into(), (-s).into()], [s.into(), c.into()]]
}

/// `U = e^{iα} Rz(β) Ry(γ) Rz(δ)`, returned as `(α, β, γ, δ)`.
pub fn zyz_angles(u: &Mat2) -> (f64, f64, f64, f64) {
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let alpha = det.arg() / 2.0;
    let ph = Complex64::from_polar(1.0, -alpha);
    let a = u[0][0] * ph;
    let b = u[1][0] * ph;
    let gamma = 2.0 * b.norm().atan2(a.norm());
    let arg_a = if a.norm() > NEGLIGIBLE { a.arg() } else { 0.0 };
    let arg_b = if b.norm() > NEGLIGIBLE { b.arg() } else { 0.0 };
    (alpha, arg_b - arg_a, gamma, -arg_a - arg_b)
}

/// A unitary square root of a 2×2 unitary.
pub fn sqrt2(u: &Mat2) -> Mat2 {
    let tr = u[0][0] + u[1][1];
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let disc = (tr * tr / 4.0 - det).sqrt();
    let s1 = (tr / 2.0 + disc).sqrt();
    let s2a = (tr / 2.0 - disc).sqrt();
    let s2 = if (s1 + s2a).norm() >= (s1 - s2a).norm() { s2a } else { -s2a };
    let k = s1 * s2;
    let den = s1 + s2;
    [[(u[0][0] + k) / den, u[0][1] / den], [u[1][0] / den, (u[1][1] + k) / den]]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ElementaryOp {
    Single { target: usize, matrix: Mat2 },
    Cnot { control: usize, target: usize },
}

impl ElementaryOp {
    fn touches(&self, q: usize) -> bool {
        match *self {
            ElementaryOp::Single { target, .. } => target == q,
            ElementaryOp::Cnot { control, target } => control == q || target == q,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementaryProgram {
    pub n_qubits: usize,
    pub ops: Vec<ElementaryOp>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GateCounts {
    pub single: usize,
    pub cnot: usize,
    pub total: usize,
}

impl ElementaryProgram {
    pub fn new(n_qubits: usize) -> Self {
        ElementaryProgram { n_qubits, ops: Vec::new() }
    }

    pub fn counts(&self) -> GateCounts {
        let cnot = self.ops.iter().filter(|o| matches!(o, ElementaryOp::Cnot { .. })).count();
        GateCounts { single: self.ops.len() - cnot, cnot, total: self.ops.len() }
    }

    pub fn validate(&self) -> Result<()> {
        for op in &self.ops {
            match *op {
                ElementaryOp::Single { target, ref matrix } => {
                    if target >= self.n_qubits {
                        return Err(Error::IndexOutOfRange { index: target, n_qubits: self.n_qubits });
                    }
                    let dev = max_dist2(&mul2(&adjoint2(matrix), matrix), &diag2(ONE, ONE));
                    if dev > EXACT_MATCH {
                        return Err(Error::NotUnitary(dev));
                    }
                }
                ElementaryOp::Cnot { control, target } => {
                    let bad = control.max(target);
                    if bad >= self.n_qubits {
                        return Err(Error::IndexOutOfRange { index: bad, n_qubits: self.n_qubits });
                    }
                    if control == target {
                        return Err(Error::DuplicateIndex(control));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_placement(op: &ElementaryOp) -> Placement {
        match *op {
            ElementaryOp::Single { target, matrix } => Placement::new(GateSpec::single_qubit_matrix(matrix), vec![target]),
            ElementaryOp::Cnot { control, target } => {
                Placement::new(GateSpec::standard(StandardGate::Cnot), vec![control, target])
            }
        }
    }

    /// As-soon-as-possible layering into a circuit.
    pub fn to_circuit(&self) -> Result<Circuit> {
        let mut layers: Vec<Vec<Placement>> = Vec::new();
        let mut ready = vec![0usize; self.n_qubits];
        for op in &self.ops {
            let qubits = match *op {
                ElementaryOp::Single { target, .. } => vec![target],
                ElementaryOp::Cnot { control, target } => vec![control, target],
            };
            let layer = qubits.iter().map(|&q| ready[q]).max().unwrap_or(0);
            if layer == layers.len() {
                layers.push(Vec::new());
            }
            layers[layer].push(Self::to_placement(op));
            for q in qubits {
                ready[q] = layer + 1;
            }
        }
        let mut c = Circuit::new(self.n_qubits)?;
        for l in layers {
            c.push_layer(l)?;
        }
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(self.to_circuit()?.to_json())
    }

    /// The implemented `2^n × 2^n` matrix.
    pub fn to_matrix(&self) -> Result<Matrix> {
        let dim = 1usize << self.n_qubits;
        let cnot = crate::gatezoo::standard_gate(StandardGate::Cnot);
        let mut cache: Vec<LinearOp> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            if let ElementaryOp::Single { matrix, .. } = op {
                cache.push(LinearOp::new(1, Matrix::from_row_iterator(2, 2, matrix.iter().flatten().copied()))?);
            }
        }
        let mut out = Matrix::zeros(dim, dim);
        for col in 0..dim {
            let mut s = StateVector::basis(self.n_qubits, col as u64)?;
            let mut k = 0;
            for op in &self.ops {
                s = match *op {
                    ElementaryOp::Single { target, .. } => {
                        k += 1;
                        s.apply(&cache[k - 1], &[target])?
                    }
                    ElementaryOp::Cnot { control, target } => s.apply(&cnot, &[control, target])?,
                };
            }
            for (r, a) in s.amplitudes().iter().enumerate() {
                out[(r, col)] = *a;
            }
        }
        Ok(out)
    }

    /// Fuse runs of single-qubit gates on a qubit, drop gates that are a
    /// phase times the identity, and cancel adjacent equal CNOTs.
    pub fn simplify(&mut self) {
        let mut out: Vec<Option<ElementaryOp>> = Vec::with_capacity(self.ops.len());
        let mut last: Vec<Option<usize>> = vec![None; self.n_qubits];
        for op in self.ops.drain(..) {
            match op {
                ElementaryOp::Single { target, matrix } => {
                    if let Some(k) = last[target] {
                        if let Some(ElementaryOp::Single { matrix: prev, .. }) = &mut out[k] {
                            *prev = mul2(&matrix, prev);
                            continue;
                        }
                    }
                    last[target] = Some(out.len());
                    out.push(Some(ElementaryOp::Single { target, matrix }));
                }
                ElementaryOp::Cnot { control, target } => {
                    if let (Some(a), Some(b)) = (last[control], last[target]) {
                        if a == b && out[a] == Some(ElementaryOp::Cnot { control, target }) {
                            out[a] = None;
                            // earlier ops on these qubits become visible again
                            for q in [control, target] {
                                last[q] = (0..a).rev().find(|&i| out[i].as_ref().is_some_and(|o| o.touches(q)));
                            }
                            continue;
                        }
                    }
                    last[control] = Some(out.len());
                    last[target] = Some(out.len());
                    out.push(Some(op));
                }
            }
        }
        self.ops = out
            .into_iter()
            .flatten()
            .filter(|op| !matches!(op, ElementaryOp::Single { matrix, .. } if scalar_distance(matrix) < EXACT_MATCH))
            .collect();
    }
}

/// A unitary acting nontrivially only on basis states `i < j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevel {
    pub dim: usize,
    pub i: usize,
    pub j: usize,
    /// Rows and columns ordered `(i, j)`.
    pub matrix: Mat2,
}

impl TwoLevel {
    pub fn to_matrix(&self) -> Matrix {
        let mut m = Matrix::identity(self.dim, self.dim);
        let idx = [self.i, self.j];
        for r in 0..2 {
            for c in 0..2 {
                m[(idx[r], idx[c])] = self.matrix[r][c];
            }
        }
        m
    }

    fn apply_left(&self, w: &mut Matrix) {
        for c in 0..w.ncols() {
            let (a, b) = (w[(self.i, c)], w[(self.j, c)]);
            w[(self.i, c)] = self.matrix[0][0] * a + self.matrix[0][1] * b;
            w[(self.j, c)] = self.matrix[1][0] * a + self.matrix[1][1] * b;
        }
    }

    fn adjoint(&self) -> TwoLevel {
        TwoLevel { matrix: adjoint2(&self.matrix), ..self.clone() }
    }
}

fn check_unitary_arity(u: &LinearOp) -> Result<()> {
    if u.arity() > MAX_COMPILE_ARITY {
        return Err(Error::SizeCap { what: "compile arity", value: u.arity() as u128, cap: MAX_COMPILE_ARITY as u128 });
    }
    let dev = u.unitarity_deviation();
    if dev > UNITARY_TOL {
        return Err(Error::NotUnitary(dev));
    }
    Ok(())
}

/// Column-by-column elimination. The product of the returned factors, in
/// order, equals `U`.
pub fn two_level_factorization(u: &LinearOp) -> Result<Vec<TwoLevel>> {
    check_unitary_arity(u)?;
    let dim = u.dim();
    let mut w = u.matrix().clone();
    let mut applied: Vec<TwoLevel> = Vec::new();
    for c in 0..dim.saturating_sub(1) {
        for r in c + 1..dim {
            let b = w[(r, c)];
            if b.norm() < NEGLIGIBLE {
                continue;
            }
            let a = w[(c, c)];
            let nu = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let g = TwoLevel { dim, i: c, j: r, matrix: [[a.conj() / nu, b.conj() / nu], [-b / nu, a / nu]] };
            g.apply_left(&mut w);
            applied.push(g);
        }
        let a = w[(c, c)];
        if (a - ONE).norm() > NEGLIGIBLE {
            let g = TwoLevel { dim, i: c, j: c + 1, matrix: diag2(a.conj() / a.norm(), ONE) };
            g.apply_left(&mut w);
            applied.push(g);
        }
    }
    let mut factors: Vec<TwoLevel> = applied.iter().map(TwoLevel::adjoint).collect();
    if dim >= 2 {
        let phase = w[(dim - 1, dim - 1)];
        if (phase - ONE).norm() > NEGLIGIBLE {
            factors.push(TwoLevel { dim, i: dim - 2, j: dim - 1, matrix: diag2(ONE, phase / phase.norm()) });
        }
    }
    let mut merged: Vec<TwoLevel> = Vec::with_capacity(factors.len());
    for f in factors {
        match merged.last_mut() {
            Some(prev) if prev.i == f.i && prev.j == f.j => prev.matrix = mul2(&prev.matrix, &f.matrix),
            _ => merged.push(f),
        }
    }
    merged.retain(|f| max_dist2(&f.matrix, &diag2(ONE, ONE)) > NEGLIGIBLE);
    Ok(merged)
}

fn bit(value: usize, q: usize, n: usize) -> bool {
    (value >> (n - 1 - q)) & 1 == 1
}

/// Append a single-qubit gate on `target` conditioned on every listed
/// qubit holding the listed value.
pub fn push_controlled(prog: &mut ElementaryProgram, controls: &[(usize, bool)], target: usize, w: &Mat2) {
    for &(q, v) in controls {
        if !v {
            prog.ops.push(ElementaryOp::Single { target: q, matrix: PAULI_X });
        }
    }
    let positive: Vec<usize> = controls.iter().map(|&(q, _)| q).collect();
    push_multi_controlled(prog, &positive, target, w);
    for &(q, v) in controls {
        if !v {
            prog.ops.push(ElementaryOp::Single { target: q, matrix: PAULI_X });
        }
    }
}

fn push_multi_controlled(prog: &mut ElementaryProgram, controls: &[usize], target: usize, w: &Mat2) {
    match controls {
        [] => prog.ops.push(ElementaryOp::Single { target, matrix: *w }),
        [c] if max_dist2(w, &PAULI_X) < EXACT_MATCH => prog.ops.push(ElementaryOp::Cnot { control: *c, target }),
        [c] => {
            let (alpha, beta, gamma, delta) = zyz_angles(w);
            let a = mul2(&rz(beta), &ry(gamma / 2.0));
            let b = mul2(&ry(-gamma / 2.0), &rz(-(delta + beta) / 2.0));
            let cc = rz((delta - beta) / 2.0);
            prog.ops.push(ElementaryOp::Single { target, matrix: cc });
            prog.ops.push(ElementaryOp::Cnot { control: *c, target });
            prog.ops.push(ElementaryOp::Single { target, matrix: b });
            prog.ops.push(ElementaryOp::Cnot { control: *c, target });
            prog.ops.push(ElementaryOp::Single { target, matrix: a });
            prog.ops.push(ElementaryOp::Single { target: *c, matrix: diag2(ONE, Complex64::from_polar(1.0, alpha)) });
        }
        [rest @ .., last] => {
            let v = sqrt2(w);
            let v_dag = adjoint2(&v);
            push_multi_controlled(prog, &[*last], target, &v);
            push_multi_controlled(prog, rest, *last, &PAULI_X);
            push_multi_controlled(prog, &[*last], target, &v_dag);
            push_multi_controlled(prog, rest, *last, &PAULI_X);
            push_multi_controlled(prog, rest, target, &v);
        }
    }
}

/// Gray-code routing from `i` towards `j`, then a controlled gate on the
/// last differing bit, then the routing undone.
pub fn synthesize_two_level(tl: &TwoLevel) -> Result<ElementaryProgram> {
    let n = tl.dim.trailing_zeros() as usize;
    if !tl.dim.is_power_of_two() || n == 0 {
        return Err(Error::InvalidParameter(format!("dimension {} is not a power of two ≥ 2", tl.dim)));
    }
    if n > MAX_COMPILE_ARITY {
        return Err(Error::SizeCap { what: "compile arity", value: n as u128, cap: MAX_COMPILE_ARITY as u128 });
    }
    if tl.i >= tl.dim || tl.j >= tl.dim || tl.i == tl.j {
        return Err(Error::InvalidParameter(format!("bad two-level pair ({}, {})", tl.i, tl.j)));
    }
    let diff: Vec<usize> = (0..n).filter(|&q| bit(tl.i, q, n) != bit(tl.j, q, n)).collect();
    let mut path = vec![tl.i];
    for &q in &diff {
        path.push(path.last().unwrap() ^ (1 << (n - 1 - q)));
    }
    let controls_for = |state: usize, skip: usize| -> Vec<(usize, bool)> {
        (0..n).filter(|&q| q != skip).map(|q| (q, bit(state, q, n))).collect()
    };
    let mut prog = ElementaryProgram::new(n);
    let swaps: Vec<(Vec<(usize, bool)>, usize)> =
        (0..diff.len() - 1).map(|s| (controls_for(path[s], diff[s]), diff[s])).collect();
    for (ctrl, q) in &swaps {
        push_controlled(&mut prog, ctrl, *q, &PAULI_X);
    }
    let t = *diff.last().unwrap();
    let before = path[diff.len() - 1];
    let w = if bit(before, t, n) { mul2(&PAULI_X, &mul2(&tl.matrix, &PAULI_X)) } else { tl.matrix };
    push_controlled(&mut prog, &controls_for(before, t), t, &w);
    for (ctrl, q) in swaps.iter().rev() {
        push_controlled(&mut prog, ctrl, *q, &PAULI_X);
    }
    prog.simplify();
    Ok(prog)
}

fn embed_single(n: usize, t: usize, w: &Mat2) -> Matrix {
    let dim = 1 << n;
    Matrix::from_fn(dim, dim, |r, c| {
        if (r ^ c) & !(1 << (n - 1 - t)) != 0 {
            return ZERO;
        }
        w[bit(r, t, n) as usize][bit(c, t, n) as usize]
    })
}

fn embed_cnot(n: usize, control: usize, target: usize) -> Matrix {
    let dim = 1 << n;
    Matrix::from_fn(dim, dim, |r, c| {
        let image = if bit(c, control, n) { c ^ (1 << (n - 1 - target)) } else { c };
        if r == image {
            ONE
        } else {
            ZERO
        }
    })
}

/// A single placement when `U` is one CNOT or one single-qubit gate
/// tensored with identities.
fn recognize_elementary(u: &LinearOp) -> Option<ElementaryOp> {
    let n = u.arity();
    let m = u.matrix();
    for t in 0..n {
        let w: Mat2 = [[m[(0, 0)], m[(0, 1 << (n - 1 - t))]], [m[(1 << (n - 1 - t), 0)], m[(1 << (n - 1 - t), 1 << (n - 1 - t))]]];
        if phase_invariant_distance(&embed_single(n, t, &w), m) < EXACT_MATCH {
            return Some(ElementaryOp::Single { target: t, matrix: w });
        }
    }
    for control in 0..n {
        for target in (0..n).filter(|&t| t != control) {
            if phase_invariant_distance(&embed_cnot(n, control, target), m) < EXACT_MATCH {
                return Some(ElementaryOp::Cnot { control, target });
            }
        }
    }
    None
}

/// Regression guard on gate counts: `10·m³·4^m·5`.
pub fn gate_count_guard(m: usize) -> usize {
    10 * m.pow(3) * 4usize.pow(m as u32) * 5
}

pub fn compile_unitary(u: &LinearOp) -> Result<ElementaryProgram> {
    check_unitary_arity(u)?;
    let n = u.arity();
    if n == 0 {
        return Ok(ElementaryProgram::new(0));
    }
    if let Some(op) = recognize_elementary(u) {
        let mut prog = ElementaryProgram { n_qubits: n, ops: vec![op] };
        prog.simplify();
        return Ok(prog);
    }
    let mut prog = ElementaryProgram::new(n);
    // factors multiply left to right, so the rightmost acts first
    for tl in two_level_factorization(u)?.iter().rev() {
        prog.ops.extend(synthesize_two_level(tl)?.ops);
    }
    prog.simplify();
    Ok(prog)
}

/// Replace every gate of arity ≥ 2 other than CNOT by its compiled form.
/// Compilations are cached per gate.
pub fn compile_circuit(circuit: &Circuit) -> Result<Circuit> {
    let mut cache: HashMap<String, ElementaryProgram> = HashMap::new();
    let mut out = Circuit::new(circuit.n_qubits)?;
    for layer in &circuit.layers {
        let mut progs = Vec::new();
        let mut passthrough = Vec::new();
        for pl in layer {
            let is_cnot = pl.gate.family == GateFamily::Standard && pl.gate.name.as_deref() == Some("CNOT");
            if pl.gate.arity() < 2 || is_cnot {
                passthrough.push(pl.clone());
                continue;
            }
            let key = format!("{}|{}", serde_json::to_string(&pl.gate).unwrap_or_default(), pl.adjoint);
            if !cache.contains_key(&key) {
                let op = pl.gate.to_op()?;
                let op = if pl.adjoint { op.adjoint() } else { op };
                cache.insert(key.clone(), compile_unitary(&op)?);
            }
            let prog = &cache[&key];
            let remapped = ElementaryProgram {
                n_qubits: circuit.n_qubits,
                ops: prog
                    .ops
                    .iter()
                    .map(|op| match *op {
                        ElementaryOp::Single { target, matrix } => ElementaryOp::Single { target: pl.targets[target], matrix },
                        ElementaryOp::Cnot { control, target } => {
                            ElementaryOp::Cnot { control: pl.targets[control], target: pl.targets[target] }
                        }
                    })
                    .collect(),
            };
            progs.push(remapped);
        }
        if !passthrough.is_empty() {
            out.push_layer(passthrough)?;
        }
        // gates within a layer act on disjoint qubits, so their programs commute
        let merged = ElementaryProgram { n_qubits: circuit.n_qubits, ops: progs.into_iter().flat_map(|p| p.ops).collect() };
        if !merged.ops.is_empty() {
            out.extend(merged.to_circuit()?)?;
        }
    }
    Ok(out)
}
