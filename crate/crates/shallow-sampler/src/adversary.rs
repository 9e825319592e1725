//! Classical side: `d`-local functions, block decompositions, the statistical
//! tests that witness a distance from the target distributions, and an
//! exhaustive minimum-distance search over tiny local functions.
//!
//! Inputs and outputs are indexed from 0. As integers, input strings put
//! input 0 in the most significant bit, and likewise for outputs.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bintree::{tree_neighborhood, BalancedTree, ForestPartition, TreePartition, TreeVar};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::targets::{self, BiasedSource, Pmf, TargetKind};

pub const MAX_INPUTS: usize = 24;
pub const MAX_SEARCH_SPACE: u128 = 1_000_000_000;
pub const MAX_BRUTE_BLOCK: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawWire", into = "RawWire")]
pub struct OutputWire {
    pub deps: Vec<usize>,
    /// Entry `a` is the output when the dependencies read `a` (first
    /// dependency most significant).
    pub table: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct RawWire {
    deps: Vec<usize>,
    table: String,
}

impl TryFrom<RawWire> for OutputWire {
    type Error = Error;

    fn try_from(raw: RawWire) -> Result<Self> {
        let table: BitString = raw.table.parse()?;
        Ok(OutputWire { deps: raw.deps, table: table.bits().to_vec() })
    }
}

impl From<OutputWire> for RawWire {
    fn from(w: OutputWire) -> Self {
        RawWire { deps: w.deps, table: BitString::new(w.table).to_string() }
    }
}

impl OutputWire {
    pub fn new(deps: Vec<usize>, table: Vec<bool>) -> Self {
        OutputWire { deps, table }
    }

    pub fn constant(value: bool) -> Self {
        OutputWire { deps: vec![], table: vec![value] }
    }

    pub fn copy(input: usize) -> Self {
        OutputWire { deps: vec![input], table: vec![false, true] }
    }

    pub fn xor2(a: usize, b: usize) -> Self {
        OutputWire { deps: vec![a, b], table: vec![false, true, true, false] }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFunction")]
pub struct LocalFunction {
    l: usize,
    d: usize,
    outputs: Vec<OutputWire>,
}

#[derive(Deserialize)]
struct RawFunction {
    l: usize,
    d: usize,
    outputs: Vec<OutputWire>,
}

impl TryFrom<RawFunction> for LocalFunction {
    type Error = Error;

    fn try_from(raw: RawFunction) -> Result<Self> {
        LocalFunction::new(raw.l, raw.d, raw.outputs)
    }
}

impl LocalFunction {
    pub fn new(l: usize, d: usize, outputs: Vec<OutputWire>) -> Result<Self> {
        if l > 63 || outputs.len() > 63 {
            return Err(Error::SizeCap { what: "function size", value: l.max(outputs.len()) as u128, cap: 63 });
        }
        for (o, w) in outputs.iter().enumerate() {
            if w.deps.len() > d {
                return Err(Error::InvalidParameter(format!("output {o} has {} dependencies > d = {d}", w.deps.len())));
            }
            for (k, &j) in w.deps.iter().enumerate() {
                if j >= l {
                    return Err(Error::IndexOutOfRange { index: j, n_qubits: l });
                }
                if w.deps[..k].contains(&j) {
                    return Err(Error::DuplicateIndex(j));
                }
            }
            if w.table.len() != 1 << w.deps.len() {
                return Err(Error::LengthMismatch { expected: 1 << w.deps.len(), got: w.table.len() });
            }
        }
        Ok(LocalFunction { l, d, outputs })
    }

    /// `(r_1, r_1 ⊕ r_2, …, r_{ℓ−1} ⊕ r_ℓ, r_ℓ)`.
    pub fn parity_chain(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidParameter("parity chain needs at least one input".into()));
        }
        let mut outputs = vec![OutputWire::copy(0)];
        outputs.extend((1..l).map(|i| OutputWire::xor2(i - 1, i)));
        outputs.push(OutputWire::copy(l - 1));
        LocalFunction::new(l, 2, outputs)
    }

    /// Output `i` copies input `i`, followed by `extra` constant-zero outputs.
    pub fn identity(l: usize, extra: usize) -> Result<Self> {
        let mut outputs: Vec<_> = (0..l).map(OutputWire::copy).collect();
        outputs.extend((0..extra).map(|_| OutputWire::constant(false)));
        LocalFunction::new(l, 1, outputs)
    }

    pub fn constant(l: usize, value: &BitString) -> Result<Self> {
        LocalFunction::new(l, 0, value.bits().iter().map(|&b| OutputWire::constant(b)).collect())
    }

    /// Each output reads `d` distinct uniformly chosen inputs through a
    /// uniformly random truth table.
    pub fn random(l: usize, m: usize, d: usize, rng: &mut impl Rng) -> Result<Self> {
        let k = d.min(l);
        let outputs = (0..m)
            .map(|_| {
                let mut deps: Vec<usize> = rand::seq::index::sample(rng, l, k).into_vec();
                deps.sort_unstable();
                let table = (0..1usize << k).map(|_| rng.gen::<bool>()).collect();
                OutputWire::new(deps, table)
            })
            .collect();
        LocalFunction::new(l, d, outputs)
    }

    pub fn n_inputs(&self) -> usize {
        self.l
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn locality(&self) -> usize {
        self.d
    }

    pub fn outputs(&self) -> &[OutputWire] {
        &self.outputs
    }

    #[inline]
    fn output_bit(&self, o: usize, u: u64) -> bool {
        let w = &self.outputs[o];
        let a = w.deps.iter().fold(0usize, |acc, &j| (acc << 1) | ((u >> (self.l - 1 - j)) & 1) as usize);
        w.table[a]
    }

    /// Evaluate on an input given as an integer; returns the output integer.
    pub fn evaluate_index(&self, u: u64) -> u64 {
        let m = self.outputs.len();
        (0..m).fold(0u64, |acc, o| (acc << 1) | self.output_bit(o, u) as u64)
    }

    pub fn evaluate(&self, u: &BitString) -> Result<BitString> {
        if u.len() != self.l {
            return Err(Error::LengthMismatch { expected: self.l, got: u.len() });
        }
        Ok(BitString::from_index(self.evaluate_index(u.index()), self.outputs.len()))
    }
}

/// Distribution of the input bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum InputSource {
    Uniform,
    /// Independent bits with `Pr[0] = 1/2 + bias`.
    Biased(f64),
}

impl InputSource {
    fn check(self) -> Result<()> {
        if let InputSource::Biased(b) = self {
            BiasedSource::new(b, 0)?;
        }
        Ok(())
    }

    /// Probability of the `l`-bit input `u`.
    pub fn weight(self, u: u64, l: usize) -> f64 {
        match self {
            InputSource::Uniform => (0.5f64).powi(l as i32),
            InputSource::Biased(b) => {
                let ones = u.count_ones() as i32;
                (0.5 - b).powi(ones) * (0.5 + b).powi(l as i32 - ones)
            }
        }
    }
}

impl From<BiasedSource> for InputSource {
    fn from(s: BiasedSource) -> Self {
        if s.bias == 0.0 {
            InputSource::Uniform
        } else {
            InputSource::Biased(s.bias)
        }
    }
}

fn check_inputs(l: usize) -> Result<()> {
    if l > MAX_INPUTS {
        return Err(Error::SizeCap { what: "input count", value: l as u128, cap: MAX_INPUTS as u128 });
    }
    Ok(())
}

const ENUM_CHUNK: u64 = 1 << 12;

/// Exact output distribution by weighted enumeration of all inputs. Chunks
/// are merged in input order so results do not depend on the thread count.
pub fn output_pmf(f: &LocalFunction, source: InputSource) -> Result<Pmf> {
    check_inputs(f.l)?;
    source.check()?;
    let total = 1u64 << f.l;
    let chunks: Vec<BTreeMap<u64, f64>> = (0..total.div_ceil(ENUM_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = BTreeMap::new();
            for u in c * ENUM_CHUNK..((c + 1) * ENUM_CHUNK).min(total) {
                let w = source.weight(u, f.l);
                if w > 0.0 {
                    *acc.entry(f.evaluate_index(u)).or_insert(0.0) += w;
                }
            }
            acc
        })
        .collect();
    let mut merged: BTreeMap<u64, f64> = BTreeMap::new();
    for chunk in chunks {
        for (z, w) in chunk {
            *merged.entry(z).or_insert(0.0) += w;
        }
    }
    Pmf::from_entries(f.n_outputs(), merged)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DependencyGraph {
    pub input_to_outputs: Vec<Vec<usize>>,
    pub output_to_inputs: Vec<Vec<usize>>,
}

impl DependencyGraph {
    /// Outputs reading any of `inputs`.
    pub fn outputs_of(&self, inputs: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        inputs.into_iter().flat_map(|j| self.input_to_outputs[j].iter().copied()).collect()
    }

    /// Inputs read by any of `outputs`.
    pub fn inputs_of(&self, outputs: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        outputs.into_iter().flat_map(|o| self.output_to_inputs[o].iter().copied()).collect()
    }

    /// `hist[k]` is the number of inputs feeding exactly `k` outputs.
    pub fn input_degree_histogram(&self) -> Vec<usize> {
        let max = self.input_to_outputs.iter().map(Vec::len).max().unwrap_or(0);
        let mut hist = vec![0; max + 1];
        for outs in &self.input_to_outputs {
            hist[outs.len()] += 1;
        }
        hist
    }
}

pub fn dependency_graph(f: &LocalFunction) -> DependencyGraph {
    let mut input_to_outputs = vec![Vec::new(); f.l];
    let mut output_to_inputs = Vec::with_capacity(f.n_outputs());
    for (o, w) in f.outputs.iter().enumerate() {
        let mut deps = w.deps.clone();
        deps.sort_unstable();
        for &j in &deps {
            input_to_outputs[j].push(o);
        }
        output_to_inputs.push(deps);
    }
    DependencyGraph { input_to_outputs, output_to_inputs }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub controller: usize,
    pub outputs: Vec<usize>,
}

/// `f(x, y) = g_1(x_1, y) ∘ … ∘ g_s(x_s, y) ∘ h(y)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    pub x_inputs: Vec<usize>,
    pub y_inputs: Vec<usize>,
    pub blocks: Vec<Block>,
    pub residual: Vec<usize>,
    pub final_bit: usize,
    /// Controller dropped because it fed the final bit, if any.
    pub absorbed: Option<usize>,
}

impl BlockDecomposition {
    pub fn s(&self) -> usize {
        self.blocks.len()
    }

    fn build(f: &LocalFunction, blocks: Vec<Block>, absorbed: Option<usize>) -> Self {
        let x_inputs: Vec<usize> = blocks.iter().map(|b| b.controller).collect();
        let y_inputs = (0..f.l).filter(|j| !x_inputs.contains(j)).collect();
        let covered: BTreeSet<usize> = blocks.iter().flat_map(|b| b.outputs.iter().copied()).collect();
        let residual = (0..f.n_outputs()).filter(|o| !covered.contains(o)).collect();
        BlockDecomposition { x_inputs, y_inputs, blocks, residual, final_bit: f.n_outputs() - 1, absorbed }
    }

    /// Input integer with the `y` bits taken from `y` (in `y_inputs` order)
    /// and the `x` bits from `x` (in block order).
    pub fn compose_input(&self, l: usize, x: u64, y: u64) -> u64 {
        let s = self.x_inputs.len();
        let ny = self.y_inputs.len();
        let mut u = 0u64;
        for (k, &j) in self.x_inputs.iter().enumerate() {
            u |= ((x >> (s - 1 - k)) & 1) << (l - 1 - j);
        }
        for (k, &j) in self.y_inputs.iter().enumerate() {
            u |= ((y >> (ny - 1 - k)) & 1) << (l - 1 - j);
        }
        u
    }

    fn y_of(&self, l: usize, u: u64) -> u64 {
        self.y_inputs.iter().fold(0u64, |acc, &j| (acc << 1) | ((u >> (l - 1 - j)) & 1))
    }
}

fn block_mask(m: usize, outputs: &[usize]) -> u64 {
    outputs.iter().map(|&o| 1u64 << (m - 1 - o)).sum()
}

/// Greedy choice of inputs with pairwise disjoint output neighbourhoods,
/// lowest index first. A chosen input that feeds the final bit is demoted to
/// `y` (at most one can, since the neighbourhoods are disjoint).
pub fn viola_block_decomposition(f: &LocalFunction) -> Result<BlockDecomposition> {
    if f.n_outputs() == 0 {
        return Err(Error::InvalidParameter("function has no outputs".into()));
    }
    let g = dependency_graph(f);
    let final_bit = f.n_outputs() - 1;
    let mut removed = vec![false; f.l];
    let mut blocks = Vec::new();
    let mut absorbed = None;
    for v in 0..f.l {
        if removed[v] || g.input_to_outputs[v].is_empty() {
            continue;
        }
        let outs = g.outputs_of([v]);
        for j in g.inputs_of(outs.iter().copied()) {
            removed[j] = true;
        }
        if outs.contains(&final_bit) {
            absorbed = Some(v);
            continue;
        }
        blocks.push(Block { controller: v, outputs: outs.into_iter().collect() });
    }
    Ok(BlockDecomposition::build(f, blocks, absorbed))
}

/// Exhaustive toggle test: flipping `x_i` may only change block `i`.
pub fn verify_decomposition(f: &LocalFunction, dec: &BlockDecomposition) -> Result<()> {
    check_inputs(f.l)?;
    let m = f.n_outputs();
    let masks: Vec<u64> = dec.blocks.iter().map(|b| block_mask(m, &b.outputs)).collect();
    let bad = (0..1u64 << f.l).into_par_iter().find_map_any(|u| {
        let z = f.evaluate_index(u);
        dec.blocks.iter().zip(&masks).find_map(|(b, &mask)| {
            let flipped = f.evaluate_index(u ^ (1 << (f.l - 1 - b.controller)));
            ((z ^ flipped) & !mask != 0).then(|| format!("toggling input {} at u = {u} leaks outside its block", b.controller))
        })
    });
    match bad {
        Some(msg) => Err(Error::OracleDisagreement(msg)),
        None => Ok(()),
    }
}

/// Upper bound on a forest's variable count: `4d` outputs per controller,
/// each in a small tree of at most `2(2^D − 1)` variables.
pub fn forest_size_bound(d: usize, d_layers: usize) -> usize {
    4 * d.max(1) * 2 * ((1 << d_layers) - 1)
}

/// Greedy forest decomposition for the tree target. Outputs `0 … N−1` are the
/// tree variables in `(d, x)` order and output `N` is the final bit.
pub fn tree_forest_decomposition(
    f: &LocalFunction,
    tp: &TreePartition,
) -> Result<(BlockDecomposition, ForestPartition)> {
    let tree = &tp.tree;
    let nv = tree.n_vars();
    if f.n_outputs() != nv + 1 {
        return Err(Error::LengthMismatch { expected: nv + 1, got: f.n_outputs() });
    }
    let g = dependency_graph(f);
    let top: Vec<usize> = tp.tree_vars(0).into_iter().map(|v| tree.var_index(v)).collect();
    let fixed = g.inputs_of(top.into_iter().chain([nv]));
    let degree_cap = 4 * f.d.max(1);
    let mut removed: Vec<bool> = (0..f.l)
        .map(|j| fixed.contains(&j) || g.input_to_outputs[j].is_empty() || g.input_to_outputs[j].len() > degree_cap)
        .collect();
    let mut forests: Vec<BTreeSet<TreeVar>> = vec![BTreeSet::new()];
    let mut blocks = Vec::new();
    for v in 0..f.l {
        if removed[v] {
            continue;
        }
        let vars: BTreeSet<TreeVar> = g.outputs_of([v]).into_iter().map(|o| tree.var_at(o)).collect();
        let forest = tree_neighborhood(tp, &vars);
        let outputs: Vec<usize> = forest.iter().map(|&x| tree.var_index(x)).collect();
        for j in g.inputs_of(outputs.iter().copied()) {
            removed[j] = true;
        }
        blocks.push(Block { controller: v, outputs });
        forests.push(forest);
    }
    let claimed: BTreeSet<TreeVar> = forests.iter().flatten().copied().collect();
    forests[0] = tree.all_vars().difference(&claimed).copied().collect();
    let controlling_inputs = blocks.iter().map(|b| b.controller).collect();
    let dec = BlockDecomposition::build(f, blocks, None);
    Ok((dec, ForestPartition { forests, controlling_inputs }))
}

/// `g_i(0, y) = g_i(1, y)`, with `y` listed in `y_inputs` order.
pub fn block_is_y_fixed(f: &LocalFunction, dec: &BlockDecomposition, i: usize, y: &BitString) -> Result<bool> {
    if i >= dec.s() {
        return Err(Error::IndexOutOfRange { index: i, n_qubits: dec.s() });
    }
    if y.len() != dec.y_inputs.len() {
        return Err(Error::LengthMismatch { expected: dec.y_inputs.len(), got: y.len() });
    }
    Ok(y_fixed_unchecked(f, dec, i, y.index()))
}

fn y_fixed_unchecked(f: &LocalFunction, dec: &BlockDecomposition, i: usize, y: u64) -> bool {
    let mask = block_mask(f.n_outputs(), &dec.blocks[i].outputs);
    let u = dec.compose_input(f.l, 0, y);
    let flipped = u | (1 << (f.l - 1 - dec.blocks[i].controller));
    (f.evaluate_index(u) ^ f.evaluate_index(flipped)) & mask == 0
}

fn tree_vars_of(z: &BitString, tree: &BalancedTree) -> Result<BitString> {
    let nv = tree.n_vars();
    match z.len() {
        len if len == nv => Ok(z.clone()),
        len if len == nv + 1 => Ok(z.slice(0..nv)),
        len => Err(Error::LengthMismatch { expected: nv, got: len }),
    }
}

/// `S_i = Σ_{v ∈ V(F_i)} x_v (−1)^{h(d)_v}`.
pub fn block_signed_sum(z: &BitString, fp: &ForestPartition, tree: &BalancedTree, i: usize) -> Result<i64> {
    let z = tree_vars_of(z, tree)?;
    let e = tree.n_edges();
    let h = tree.path_sums(&z.slice(0..e))?;
    Ok(fp.forests[i]
        .iter()
        .filter_map(|&v| match v {
            TreeVar::Vertex(k) if z.get(e + k - 1) => Some(if h.get(k - 1) { -1 } else { 1 }),
            _ => None,
        })
        .sum())
}

/// Closed form: every vertex bit is 1, every small-tree root has path
/// parity 1, and every edge inside a small tree is 0.
pub fn block_is_minimal_closed_form(z: &BitString, fp: &ForestPartition, tree: &BalancedTree, i: usize) -> Result<bool> {
    let z = tree_vars_of(z, tree)?;
    let e = tree.n_edges();
    let forest = fp.forests.get(i).ok_or(Error::IndexOutOfRange { index: i, n_qubits: fp.forests.len() })?;
    let h = tree.path_sums(&z.slice(0..e))?;
    for &var in forest {
        let k = var.vertex();
        let is_root = tree.parent(k).map_or(true, |p| p == 0 || !forest.contains(&TreeVar::Vertex(p)));
        let ok = match var {
            TreeVar::Vertex(_) => z.get(e + k - 1),
            TreeVar::Edge(_) if is_root => h.get(k - 1),
            TreeVar::Edge(_) => !z.get(k - 1),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Brute force: does `S_i(z)` equal the minimum over all reassignments of
/// the variables of `F_i`?
pub fn block_is_minimal_brute(z: &BitString, fp: &ForestPartition, tree: &BalancedTree, i: usize) -> Result<bool> {
    let z = tree_vars_of(z, tree)?;
    let forest: Vec<TreeVar> = fp
        .forests
        .get(i)
        .ok_or(Error::IndexOutOfRange { index: i, n_qubits: fp.forests.len() })?
        .iter()
        .copied()
        .collect();
    if forest.len() > MAX_BRUTE_BLOCK {
        return Err(Error::SizeCap { what: "block size", value: forest.len() as u128, cap: MAX_BRUTE_BLOCK as u128 });
    }
    let current = block_signed_sum(&z, fp, tree, i)?;
    let mut best = i64::MAX;
    let mut trial = z.clone();
    for a in 0..1u64 << forest.len() {
        for (k, &var) in forest.iter().enumerate() {
            trial.set(tree.var_index(var), (a >> k) & 1 == 1);
        }
        best = best.min(block_signed_sum(&trial, fp, tree, i)?);
    }
    Ok(current == best)
}

/// Both evaluations; an error if they disagree.
pub fn block_is_minimal(z: &BitString, fp: &ForestPartition, tree: &BalancedTree, i: usize) -> Result<bool> {
    let brute = block_is_minimal_brute(z, fp, tree, i)?;
    let closed = block_is_minimal_closed_form(z, fp, tree, i)?;
    if brute != closed {
        return Err(Error::OracleDisagreement(format!("block {i} at z = {z}: brute {brute}, closed form {closed}")));
    }
    Ok(brute)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TestLabel {
    T0,
    TF,
    TM,
    TS,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    pub n0: usize,
    pub nf: usize,
    pub nm: usize,
}

impl Thresholds {
    /// `N_0 = N_M = ⌈3·size^{3α}⌉`, `N_F = ⌈2·size^{3α}⌉`.
    pub fn from_alpha(size: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
        }
        let base = (size as f64).powf(3.0 * alpha);
        Ok(Thresholds { n0: (3.0 * base).ceil() as usize, nf: (2.0 * base).ceil() as usize, nm: (3.0 * base).ceil() as usize })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Variant {
    /// `z = (x, b)` against `majmod_p(x) ⊕ parity(x)`.
    Majmod,
    /// `z = (d, x, b)` against `pmmajmod_p`.
    Tree { tree: BalancedTree, forests: ForestPartition },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FixedMode {
    /// Some preimage has at least `N_F` y-fixed blocks.
    Exists,
    /// `2^N Σ_{(w,y) ∈ f^{-1}(z)} p(w,y) I(y) ≥ 1/log₂ N` under the given input bias.
    Likely { bias: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatTestConfig {
    pub variant: Variant,
    pub thresholds: Thresholds,
    pub p: u64,
    pub f: LocalFunction,
    pub decomposition: BlockDecomposition,
    pub fixed_mode: FixedMode,
}

impl StatTestConfig {
    pub fn majmod(f: LocalFunction, p: u64, thresholds: Thresholds) -> Result<Self> {
        let decomposition = viola_block_decomposition(&f)?;
        Ok(StatTestConfig { variant: Variant::Majmod, thresholds, p, f, decomposition, fixed_mode: FixedMode::Exists })
    }

    pub fn tree(f: LocalFunction, p: u64, tp: &TreePartition, thresholds: Thresholds) -> Result<Self> {
        let (decomposition, forests) = tree_forest_decomposition(&f, tp)?;
        Ok(StatTestConfig {
            variant: Variant::Tree { tree: tp.tree, forests },
            thresholds,
            p,
            f,
            decomposition,
            fixed_mode: FixedMode::Exists,
        })
    }

    fn target_kind(&self) -> (TargetKind, usize) {
        match &self.variant {
            Variant::Majmod => (TargetKind::MajmodParity, self.f.n_outputs()),
            Variant::Tree { tree, .. } => (TargetKind::Pmmajmod, tree.n_vertices()),
        }
    }
}

/// A test with its `T_F` witness set precomputed.
pub struct PreparedTest {
    cfg: StatTestConfig,
    tf_set: HashSet<u64>,
}

impl PreparedTest {
    pub fn new(cfg: StatTestConfig) -> Result<Self> {
        let f = &cfg.f;
        check_inputs(f.l)?;
        let (kind, n) = cfg.target_kind();
        if targets::target_length(kind, n) != f.n_outputs() {
            return Err(Error::LengthMismatch { expected: targets::target_length(kind, n), got: f.n_outputs() });
        }
        let dec = &cfg.decomposition;
        let ny = dec.y_inputs.len();
        let nf = cfg.thresholds.nf;
        let good_y: Vec<bool> = (0..1u64 << ny)
            .into_par_iter()
            .map(|y| (0..dec.s()).filter(|&i| y_fixed_unchecked(f, dec, i, y)).count() >= nf)
            .collect();
        let tf_set = match cfg.fixed_mode {
            FixedMode::Exists => (0..1u64 << f.l)
                .into_par_iter()
                .filter(|&u| good_y[dec.y_of(f.l, u) as usize])
                .map(|u| f.evaluate_index(u))
                .collect(),
            FixedMode::Likely { bias } => {
                let source = InputSource::Biased(bias);
                source.check()?;
                let mut mass: BTreeMap<u64, f64> = BTreeMap::new();
                for u in 0..1u64 << f.l {
                    if good_y[dec.y_of(f.l, u) as usize] {
                        *mass.entry(f.evaluate_index(u)).or_insert(0.0) += source.weight(u, f.l);
                    }
                }
                let big_n = f.n_outputs() - 1;
                let scale = (2.0f64).powi(big_n as i32);
                let threshold = 1.0 / (big_n.max(2) as f64).log2();
                mass.into_iter().filter(|&(_, w)| scale * w >= threshold).map(|(z, _)| z).collect()
            }
        };
        Ok(PreparedTest { cfg, tf_set })
    }

    pub fn config(&self) -> &StatTestConfig {
        &self.cfg
    }

    pub fn membership(&self, z: &BitString) -> Result<BTreeSet<TestLabel>> {
        let cfg = &self.cfg;
        let m = cfg.f.n_outputs();
        if z.len() != m {
            return Err(Error::LengthMismatch { expected: m, got: z.len() });
        }
        let mut labels = BTreeSet::new();
        let (kind, n) = cfg.target_kind();
        if z.get(m - 1) != targets::target_bit(kind, n, cfg.p, &z.slice(0..m - 1))? {
            labels.insert(TestLabel::TS);
        }
        let zi = z.index();
        let zero_blocks =
            cfg.decomposition.blocks.iter().filter(|b| zi & block_mask(m, &b.outputs) == 0).count();
        if zero_blocks <= cfg.thresholds.n0 {
            labels.insert(TestLabel::T0);
        }
        if let Variant::Tree { tree, forests } = &cfg.variant {
            let mut minimal = 0;
            for i in 1..forests.forests.len() {
                if block_is_minimal_closed_form(z, forests, tree, i)? {
                    minimal += 1;
                }
            }
            if minimal <= cfg.thresholds.nm {
                labels.insert(TestLabel::TM);
            }
        }
        if self.tf_set.contains(&zi) {
            labels.insert(TestLabel::TF);
        }
        Ok(labels)
    }

    pub fn pass_probability(&self, pmf: &Pmf) -> Result<PassReport> {
        let m = self.cfg.f.n_outputs();
        if pmf.bit_length() != m {
            return Err(Error::LengthMismatch { expected: m, got: pmf.bit_length() });
        }
        let mut r = PassReport::default();
        for (z, p) in pmf.support() {
            let labels = self.membership(&BitString::from_index(z, m))?;
            if !labels.is_empty() {
                r.total += p;
            }
            for l in labels {
                *match l {
                    TestLabel::T0 => &mut r.t0,
                    TestLabel::TF => &mut r.tf,
                    TestLabel::TM => &mut r.tm,
                    TestLabel::TS => &mut r.ts,
                } += p;
            }
        }
        Ok(r)
    }
}

/// Probability of landing in the whole test and in each part.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PassReport {
    pub total: f64,
    pub t0: f64,
    pub tf: f64,
    pub tm: f64,
    pub ts: f64,
}

pub fn test_membership(z: &BitString, cfg: &StatTestConfig) -> Result<BTreeSet<TestLabel>> {
    PreparedTest::new(cfg.clone())?.membership(z)
}

pub enum PassSource<'a> {
    Pmf(&'a Pmf),
    Function(&'a LocalFunction, InputSource),
}

pub fn test_pass_probability(source: PassSource<'_>, cfg: &StatTestConfig) -> Result<PassReport> {
    let test = PreparedTest::new(cfg.clone())?;
    match source {
        PassSource::Pmf(p) => test.pass_probability(p),
        PassSource::Function(f, input) => test.pass_probability(&output_pmf(f, input)?),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub min_tvd: f64,
    pub witness: LocalFunction,
    pub witness_index: u64,
    /// Number of functions attaining the minimum.
    pub minimizer_count: u64,
    /// The first minimizers in enumeration order, at most [`MINIMIZER_CAP`].
    pub minimizers: Vec<LocalFunction>,
    pub space_size: u64,
    pub wall_time_s: f64,
}

pub const MINIMIZER_CAP: usize = 4096;

fn combinations(l: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, l: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..l {
            cur.push(j);
            rec(j + 1, l, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, l, k, &mut Vec::new(), &mut out);
    out
}

/// Size of the enumeration `(C(ℓ, k)·2^{2^k})^{n_out}` with `k = min(d, ℓ)`.
pub fn search_space_size(n_out: usize, d: usize, l: usize) -> u128 {
    let k = d.min(l);
    if k >= 7 {
        return u128::MAX;
    }
    let options = combinations(l, k).len() as u128 * (1u128 << (1u32 << k));
    (0..n_out).try_fold(1u128, |acc, _| acc.checked_mul(options)).unwrap_or(u128::MAX)
}

/// Exhaustive minimum TVD over all `d`-local functions `{0,1}^ℓ → {0,1}^{n_out}`.
/// Every output reads exactly `min(d, ℓ)` inputs (tables may ignore some),
/// with dependency sets in lexicographic order and tables counted upward;
/// output 0 is the most significant digit. Ties go to the earliest function.
pub fn brute_force_min_tvd(n_out: usize, d: usize, l: usize, target: &Pmf, source: InputSource) -> Result<SearchResult> {
    let start = Instant::now();
    if target.bit_length() != n_out {
        return Err(Error::LengthMismatch { expected: n_out, got: target.bit_length() });
    }
    if n_out == 0 || n_out > 20 || l > 20 {
        return Err(Error::SizeCap { what: "search dimensions", value: n_out.max(l) as u128, cap: 20 });
    }
    source.check()?;
    let space = search_space_size(n_out, d, l);
    if space > MAX_SEARCH_SPACE {
        return Err(Error::SizeCap { what: "search space", value: space, cap: MAX_SEARCH_SPACE });
    }
    let k = d.min(l);
    let n_tables = 1usize << (1 << k);
    let options: Vec<OutputWire> = combinations(l, k)
        .into_iter()
        .flat_map(|deps| {
            (0..n_tables).map(move |t| {
                let table = (0..1usize << k).map(|a| (t >> ((1 << k) - 1 - a)) & 1 == 1).collect();
                OutputWire::new(deps.clone(), table)
            })
        })
        .collect();
    let n_opt = options.len() as u64;
    let n_inputs = 1usize << l;
    let probe = |w: &OutputWire| LocalFunction { l, d, outputs: vec![w.clone()] };
    // columns[o][u]: value of option o on input u
    let columns: Vec<Vec<bool>> =
        options.iter().map(|w| (0..n_inputs as u64).map(|u| probe(w).evaluate_index(u) == 1).collect()).collect();
    let weights: Vec<f64> = (0..n_inputs as u64).map(|u| source.weight(u, l)).collect();
    let target_dense: Vec<f64> = (0..1u64 << n_out).map(|z| target.prob(z)).collect();
    let digits = |mut idx: u64| -> Vec<usize> {
        let mut ds = vec![0usize; n_out];
        for o in (0..n_out).rev() {
            ds[o] = (idx % n_opt) as usize;
            idx /= n_opt;
        }
        ds
    };
    let tvd_of = |ds: &[usize], pmf: &mut Vec<f64>| -> f64 {
        pmf.iter_mut().for_each(|x| *x = 0.0);
        for u in 0..n_inputs {
            let z = ds.iter().fold(0usize, |acc, &o| (acc << 1) | columns[o][u] as usize);
            pmf[z] += weights[u];
        }
        0.5 * pmf.iter().zip(&target_dense).map(|(a, b)| (a - b).abs()).sum::<f64>()
    };
    const CHUNK: u64 = 1 << 14;
    let space = space as u64;
    struct Best {
        tvd: f64,
        count: u64,
        first: Vec<u64>,
    }
    let merge = |a: Best, b: Best| -> Best {
        if a.count == 0 || b.tvd < a.tvd {
            return b;
        }
        if b.count == 0 || a.tvd < b.tvd {
            return a;
        }
        let mut first = a.first;
        first.extend(b.first);
        first.truncate(MINIMIZER_CAP);
        Best { tvd: a.tvd, count: a.count + b.count, first }
    };
    let best = (0..space.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut pmf = vec![0.0; 1 << n_out];
            let mut best = Best { tvd: f64::INFINITY, count: 0, first: Vec::new() };
            for idx in c * CHUNK..((c + 1) * CHUNK).min(space) {
                let t = tvd_of(&digits(idx), &mut pmf);
                best = merge(best, Best { tvd: t, count: 1, first: vec![idx] });
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Best { tvd: f64::INFINITY, count: 0, first: Vec::new() }, merge);
    let build = |idx: u64| LocalFunction { l, d, outputs: digits(idx).into_iter().map(|o| options[o].clone()).collect() };
    Ok(SearchResult {
        min_tvd: best.tvd,
        witness: build(best.first[0]),
        witness_index: best.first[0],
        minimizer_count: best.count,
        minimizers: best.first.iter().map(|&i| build(i)).collect(),
        space_size: space,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Reproducible stream of bits with `Pr[1] = 1/2 − bias`.
pub struct BiasedBits {
    rng: ChaCha8Rng,
    prob_one: f64,
}

impl Iterator for BiasedBits {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        Some(self.rng.gen::<f64>() < self.prob_one)
    }
}

pub fn biased_input_stream(source: BiasedSource, seed: u64) -> Result<BiasedBits> {
    BiasedSource::new(source.bias, source.count)?;
    Ok(BiasedBits { rng: ChaCha8Rng::seed_from_u64(seed), prob_one: source.prob_one() })
}

/// Exact `Pr_x[MM_p(a_0 + Σ a_i x_i) ⊕ parity(u_0 + Σ u_i x_i) = b]` for
/// uniform `x`, by dynamic programming over `(S mod p, U mod 2)`.
pub fn mmp_sum_probability(p: u64, a0: i64, a: &[i64], u0: i64, u: &[i64], b: bool) -> Result<f64> {
    if a.len() != u.len() {
        return Err(Error::LengthMismatch { expected: a.len(), got: u.len() });
    }
    targets::mm_int(p, 0)?;
    let pu = p as usize;
    let mut dist = vec![[0.0f64; 2]; pu];
    dist[a0.rem_euclid(p as i64) as usize][u0.rem_euclid(2) as usize] = 1.0;
    for (&ai, &ui) in a.iter().zip(u) {
        let sa = ai.rem_euclid(p as i64) as usize;
        let su = ui.rem_euclid(2) as usize;
        let mut next = vec![[0.0f64; 2]; pu];
        for r in 0..pu {
            for q in 0..2 {
                let w = 0.5 * dist[r][q];
                next[r][q] += w;
                next[(r + sa) % pu][q ^ su] += w;
            }
        }
        dist = next;
    }
    let mut total = 0.0;
    for (r, pair) in dist.iter().enumerate() {
        for (q, &w) in pair.iter().enumerate() {
            if targets::mm_int(p, r as i64)? ^ (q == 1) == b {
                total += w;
            }
        }
    }
    Ok(total)
}

/// The explicit lower-bound chain for [`mmp_sum_probability`]: fix the
/// minority parity class of the `u_i`, and measure how far the relevant
/// remaining partial sum is from uniform mod `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MmpBound {
    pub even_case: bool,
    pub defect: f64,
    /// `1/2 − max a_i/(2p) − defect`.
    pub half_step: f64,
    /// `1/2 − max a_i/p − defect`.
    pub full_step: f64,
}

pub fn mmp_sum_bound(p: u64, a: &[i64], u: &[i64]) -> Result<MmpBound> {
    if a.len() != u.len() || a.is_empty() {
        return Err(Error::LengthMismatch { expected: a.len(), got: u.len() });
    }
    let even: Vec<i64> = a.iter().zip(u).filter(|(_, ui)| ui.rem_euclid(2) == 0).map(|(ai, _)| *ai).collect();
    let odd: Vec<i64> = a.iter().zip(u).filter(|(_, ui)| ui.rem_euclid(2) == 1).map(|(ai, _)| *ai).collect();
    let even_case = 2 * even.len() >= a.len();
    let relevant: &[i64] = if even_case { &even } else { &odd[..odd.len() - 1] };
    let defect = if relevant.is_empty() {
        1.0 - 1.0 / p as f64
    } else {
        targets::modp_weight_pmf(relevant.len(), p, relevant, 0.0)?.tvd_to_uniform()
    };
    let amax = *a.iter().max().expect("non-empty") as f64;
    let pf = p as f64;
    Ok(MmpBound { even_case, defect, half_step: 0.5 - amax / (2.0 * pf) - defect, full_step: 0.5 - amax / pf - defect })
}
