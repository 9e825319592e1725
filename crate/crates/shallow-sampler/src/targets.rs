//! Target functions, explicit distributions and small exact calculators.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bintree::BalancedTree;
use crate::bits::{index_to_string, BitString};
use crate::error::{Error, Result};

/// Bit lengths below this are stored densely.
pub const DENSE_LIMIT: usize = 20;
pub const MAX_TARGET_LEN: usize = 24;
const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    Sparse(BTreeMap<u64, f64>),
}

/// A probability mass function over `bit_length`-bit strings, keyed by the
/// big-endian index of the string.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    bit_length: usize,
    storage: Storage,
}

impl Pmf {
    pub fn from_dense(bit_length: usize, probs: Vec<f64>) -> Result<Self> {
        if bit_length > 63 {
            return Err(Error::SizeCap { what: "bit_length", value: bit_length as u128, cap: 63 });
        }
        if probs.len() != 1usize << bit_length {
            return Err(Error::LengthMismatch { expected: 1 << bit_length, got: probs.len() });
        }
        check_probs(probs.iter().copied())?;
        let storage = if bit_length < DENSE_LIMIT {
            Storage::Dense(probs)
        } else {
            Storage::Sparse(probs.into_iter().enumerate().filter(|(_, p)| *p > 0.0).map(|(i, p)| (i as u64, p)).collect())
        };
        Ok(Pmf { bit_length, storage })
    }

    /// Build from `(index, probability)` pairs; repeated indices accumulate.
    pub fn from_entries(bit_length: usize, entries: impl IntoIterator<Item = (u64, f64)>) -> Result<Self> {
        if bit_length > 63 {
            return Err(Error::SizeCap { what: "bit_length", value: bit_length as u128, cap: 63 });
        }
        let mut map = BTreeMap::new();
        for (k, p) in entries {
            if bit_length < 64 && k >> bit_length != 0 {
                return Err(Error::InvalidParameter(format!("index {k} exceeds {bit_length} bits")));
            }
            *map.entry(k).or_insert(0.0) += p;
        }
        check_probs(map.values().copied())?;
        map.retain(|_, p| *p > 0.0);
        Ok(Pmf { bit_length, storage: Storage::Sparse(map) })
    }

    pub fn point_mass(bit_length: usize, index: u64) -> Result<Self> {
        Self::from_entries(bit_length, [(index, 1.0)])
    }

    pub fn uniform(bit_length: usize) -> Result<Self> {
        let n = 1u64 << bit_length;
        Self::from_dense(bit_length, vec![1.0 / n as f64; n as usize])
    }

    pub fn bit_length(&self) -> usize {
        self.bit_length
    }

    pub fn prob(&self, index: u64) -> f64 {
        match &self.storage {
            Storage::Dense(v) => v.get(index as usize).copied().unwrap_or(0.0),
            Storage::Sparse(m) => m.get(&index).copied().unwrap_or(0.0),
        }
    }

    pub fn prob_of(&self, z: &BitString) -> f64 {
        if z.len() != self.bit_length {
            return 0.0;
        }
        self.prob(z.index())
    }

    /// Nonzero entries in increasing index order.
    pub fn support(&self) -> Box<dyn Iterator<Item = (u64, f64)> + '_> {
        match &self.storage {
            Storage::Dense(v) => Box::new(v.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(i, p)| (i as u64, *p))),
            Storage::Sparse(m) => Box::new(m.iter().map(|(k, p)| (*k, *p))),
        }
    }

    pub fn support_size(&self) -> usize {
        self.support().count()
    }

    pub fn total(&self) -> f64 {
        self.support().map(|(_, p)| p).sum()
    }

    /// Marginal on the listed bit positions, in the order given.
    pub fn marginal(&self, positions: &[usize]) -> Result<Pmf> {
        let m = self.bit_length;
        for &q in positions {
            if q >= m {
                return Err(Error::IndexOutOfRange { index: q, n_qubits: m });
            }
        }
        let k = positions.len();
        let entries = self.support().map(|(z, p)| {
            let key = positions.iter().fold(0u64, |acc, &q| (acc << 1) | ((z >> (m - 1 - q)) & 1));
            (key, p)
        });
        let sparse = Pmf::from_entries(k, entries)?;
        if k < DENSE_LIMIT {
            let mut dense = vec![0.0; 1 << k];
            for (i, p) in sparse.support() {
                dense[i as usize] = p;
            }
            return Pmf::from_dense(k, dense);
        }
        Ok(sparse)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitstring,probability\n");
        for (z, p) in self.support() {
            let _ = writeln!(out, "{},{:.16e}", index_to_string(z, self.bit_length), p);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some("bitstring,probability") => {}
            other => return Err(Error::Parse(format!("unexpected CSV header {other:?}"))),
        }
        let mut bit_length = None;
        let mut entries = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let (z, p) = line.split_once(',').ok_or_else(|| Error::Parse(format!("bad row {line:?}")))?;
            let z: BitString = z.parse()?;
            if *bit_length.get_or_insert(z.len()) != z.len() {
                return Err(Error::Parse("rows have different bit lengths".into()));
            }
            let p: f64 = p.trim().parse().map_err(|e| Error::Parse(format!("{e}")))?;
            entries.push((z.index(), p));
        }
        let bit_length = bit_length.ok_or_else(|| Error::Parse("empty pmf".into()))?;
        Pmf::from_entries(bit_length, entries)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let probabilities: BTreeMap<String, f64> =
            self.support().map(|(z, p)| (index_to_string(z, self.bit_length), p)).collect();
        serde_json::json!({ "bit_length": self.bit_length, "probabilities": probabilities })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            bit_length: usize,
            probabilities: BTreeMap<String, f64>,
        }
        let raw: Raw = serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let entries = raw
            .probabilities
            .iter()
            .map(|(z, &p)| {
                let b: BitString = z.parse()?;
                if b.len() != raw.bit_length {
                    return Err(Error::Parse(format!("{z} does not have {} bits", raw.bit_length)));
                }
                Ok((b.index(), p))
            })
            .collect::<Result<Vec<_>>>()?;
        Pmf::from_entries(raw.bit_length, entries)
    }
}

fn check_probs(probs: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    for p in probs {
        if !(p >= 0.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("invalid probability {p}")));
        }
        total += p;
    }
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidParameter(format!("probabilities sum to {total}")));
    }
    Ok(())
}

/// Half the L1 distance.
pub fn total_variation(p: &Pmf, q: &Pmf) -> Result<f64> {
    if p.bit_length != q.bit_length {
        return Err(Error::LengthMismatch { expected: p.bit_length, got: q.bit_length });
    }
    let sum = match (&p.storage, &q.storage) {
        (Storage::Dense(a), Storage::Dense(b)) => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>(),
        _ => {
            let mut keys: Vec<u64> = p.support().map(|(k, _)| k).chain(q.support().map(|(k, _)| k)).collect();
            keys.sort_unstable();
            keys.dedup();
            keys.into_iter().map(|k| (p.prob(k) - q.prob(k)).abs()).sum()
        }
    };
    Ok((0.5 * sum).min(1.0))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn check_odd_prime(p: u64) -> Result<()> {
    if p % 2 == 0 || !is_prime(p) {
        return Err(Error::NotOddPrime(p as i64));
    }
    Ok(())
}

/// Largest prime `≤ bound`, if any.
pub fn largest_prime_at_most(bound: f64) -> Option<u64> {
    if !(bound >= 2.0) {
        return None;
    }
    let mut c = bound.floor() as u64;
    while c >= 2 {
        if is_prime(c) {
            return Some(c);
        }
        c -= 1;
    }
    None
}

/// Largest prime `≤ n^α`.
pub fn choose_prime(n: usize, alpha: f64) -> Result<u64> {
    largest_prime_at_most((n as f64).powf(alpha))
        .ok_or_else(|| Error::InvalidParameter(format!("no prime at most {n}^{alpha}")))
}

/// `MM_p(j)`: 0 if `j mod p < p/2`, else 1.
pub fn mm_int(p: u64, j: i64) -> Result<bool> {
    check_odd_prime(p)?;
    Ok(mm_unchecked(p, j))
}

fn mm_unchecked(p: u64, j: i64) -> bool {
    let r = j.rem_euclid(p as i64) as u64;
    2 * r >= p
}

/// `majmod_p(x) ⊕ parity(x)`.
pub fn majmod_xor_parity(p: u64, x: &BitString) -> Result<bool> {
    let w = x.weight();
    Ok(mm_int(p, w as i64)? ^ (w % 2 == 1))
}

/// `Σ_i x_i (−1)^{h(d)_i}`.
pub fn signed_sum(tree: &BalancedTree, x: &BitString, d: &BitString) -> Result<i64> {
    if x.len() != tree.n_edges() {
        return Err(Error::LengthMismatch { expected: tree.n_edges(), got: x.len() });
    }
    let h = tree.path_sums(d)?;
    Ok((0..x.len()).filter(|&i| x.get(i)).map(|i| if h.get(i) { -1 } else { 1 }).sum())
}

/// `MM_p(Σ_i x_i (−1)^{h(d)_i}) ⊕ parity(x)`, the sum reduced into `[0, p)`.
pub fn pmmajmod(p: u64, tree: &BalancedTree, x: &BitString, d: &BitString) -> Result<bool> {
    check_odd_prime(p)?;
    let s = signed_sum(tree, x, d)?;
    Ok(mm_unchecked(p, s) ^ x.parity())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TargetKind {
    /// `(x, majmod_p(x) ⊕ parity(x))` with `|x| = n − 1`.
    MajmodParity,
    /// `(d, x, pmmajmod_p(x, d))` on the heap tree with `n` vertices.
    Pmmajmod,
}

/// Output length of the augmented target for `n`.
pub fn target_length(kind: TargetKind, n: usize) -> usize {
    match kind {
        TargetKind::MajmodParity => n,
        TargetKind::Pmmajmod => 2 * (n - 1) + 1,
    }
}

/// The target's final bit for an input string (all bits but the last).
pub fn target_bit(kind: TargetKind, n: usize, p: u64, z: &BitString) -> Result<bool> {
    match kind {
        TargetKind::MajmodParity => majmod_xor_parity(p, z),
        TargetKind::Pmmajmod => {
            let tree = BalancedTree::new(n)?;
            let e = tree.n_edges();
            pmmajmod(p, &tree, &z.slice(e..2 * e), &z.slice(0..e))
        }
    }
}

/// Uniform first coordinate with the target bit appended.
pub fn augmented_target_pmf(kind: TargetKind, n: usize, p: u64) -> Result<Pmf> {
    check_odd_prime(p)?;
    if n < 2 {
        return Err(Error::InvalidParameter("n must be at least 2".into()));
    }
    let len = target_length(kind, n);
    if len > MAX_TARGET_LEN {
        return Err(Error::SizeCap { what: "target length", value: len as u128, cap: MAX_TARGET_LEN as u128 });
    }
    let k = len - 1;
    let w = 1.0 / (1u64 << k) as f64;
    let entries = (0..1u64 << k)
        .map(|v| {
            let b = target_bit(kind, n, p, &BitString::from_index(v, k))?;
            Ok(((v << 1) | b as u64, w))
        })
        .collect::<Result<Vec<_>>>()?;
    Pmf::from_entries(len, entries)
}

/// Distribution over `Z_p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResiduePmf {
    pub modulus: u64,
    pub probs: Vec<f64>,
}

impl ResiduePmf {
    pub fn tvd_to_uniform(&self) -> f64 {
        let u = 1.0 / self.modulus as f64;
        0.5 * self.probs.iter().map(|p| (p - u).abs()).sum::<f64>()
    }

    /// Probability that the residue lies in `set`.
    pub fn mass(&self, set: impl Fn(u64) -> bool) -> f64 {
        self.probs.iter().enumerate().filter(|(r, _)| set(*r as u64)).map(|(_, p)| p).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("residue,probability\n");
        for (r, p) in self.probs.iter().enumerate() {
            let _ = writeln!(out, "{r},{p:.16e}");
        }
        out
    }
}

/// Exact law of `Σ a_i X_i mod p` for independent `X_i` with
/// `Pr[X_i = 1] = 1/2 − bias`.
pub fn modp_weight_pmf(t: usize, p: u64, coefficients: &[i64], bias: f64) -> Result<ResiduePmf> {
    if t == 0 {
        return Err(Error::InvalidParameter("t must be at least 1".into()));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p as i64));
    }
    if coefficients.len() != t {
        return Err(Error::LengthMismatch { expected: t, got: coefficients.len() });
    }
    check_bias(bias)?;
    let q1 = 0.5 - bias;
    let q0 = 0.5 + bias;
    let pu = p as usize;
    let mut dist = vec![0.0; pu];
    dist[0] = 1.0;
    for &a in coefficients {
        let shift = a.rem_euclid(p as i64) as usize;
        let mut next = vec![0.0; pu];
        for (r, &w) in dist.iter().enumerate() {
            next[r] += q0 * w;
            next[(r + shift) % pu] += q1 * w;
        }
        dist = next;
    }
    Ok(ResiduePmf { modulus: p, probs: dist })
}

/// `√p·e^{−t/p²}`.
pub fn uniformity_envelope(t: usize, p: u64) -> f64 {
    let pf = p as f64;
    pf.sqrt() * (-(t as f64) / (pf * pf)).exp()
}

/// `√p·exp(−t(1 − 4b²)/p²)`, reported without any hidden constant.
pub fn biased_uniformity_envelope(t: usize, p: u64, bias: f64) -> f64 {
    let pf = p as f64;
    pf.sqrt() * (-(t as f64) * (1.0 - 4.0 * bias * bias) / (pf * pf)).exp()
}

/// Independent Bernoulli source: `Pr[0] = 1/2 + bias`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasedSource {
    pub bias: f64,
    pub count: usize,
}

impl BiasedSource {
    pub fn new(bias: f64, count: usize) -> Result<Self> {
        check_bias(bias)?;
        Ok(BiasedSource { bias, count })
    }

    pub fn uniform(count: usize) -> Self {
        BiasedSource { bias: 0.0, count }
    }

    pub fn prob_one(&self) -> f64 {
        0.5 - self.bias
    }
}

fn check_bias(b: f64) -> Result<()> {
    if !(b.abs() <= 0.5) {
        return Err(Error::InvalidParameter(format!("bias {b} outside [-1/2, 1/2]")));
    }
    Ok(())
}

fn h2(q: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(q) + term(1.0 - q)
}

/// Binary entropy (bits) of a coin with `Pr[0] = 1/2 + b`.
pub fn bias_entropy(b: f64) -> Result<f64> {
    check_bias(b)?;
    Ok(h2(0.5 + b))
}

/// The `b ≥ 0` with `bias_entropy(b) = h`.
pub fn entropy_to_bias(h: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::InvalidParameter(format!("entropy {h} outside [0, 1]")));
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if h2(0.5 + mid) > h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `(1 − 4b², (1 − 4b²)^{1/ln 4})`.
pub fn entropy_sandwich(b: f64) -> (f64, f64) {
    let base = 1.0 - 4.0 * b * b;
    (base, base.powf(1.0 / 4f64.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn mm_examples() {
        assert!(!mm_int(3, 0).unwrap());
        assert!(mm_int(3, 2).unwrap());
        assert!(!mm_int(5, 7).unwrap());
        assert!(mm_int(5, -1).unwrap());
        assert_eq!(mm_int(4, 1), Err(Error::NotOddPrime(4)));
        assert_eq!(mm_int(2, 1), Err(Error::NotOddPrime(2)));
    }

    #[test]
    fn majmod_examples() {
        assert!(majmod_xor_parity(3, &bs("11")).unwrap());
        assert!(!majmod_xor_parity(3, &bs("000")).unwrap());
        assert!(!majmod_xor_parity(5, &bs("10101")).unwrap());
    }

    #[test]
    fn pmmajmod_examples() {
        let t = BalancedTree::new(4).unwrap();
        assert_eq!(signed_sum(&t, &bs("110"), &bs("101")).unwrap(), 0);
        assert!(!pmmajmod(3, &t, &bs("110"), &bs("101")).unwrap());
        for v in 0..8 {
            let x = BitString::from_index(v, 3);
            assert_eq!(pmmajmod(3, &t, &x, &bs("000")).unwrap(), majmod_xor_parity(3, &x).unwrap());
        }
        assert!(pmmajmod(3, &t, &bs("11"), &bs("000")).is_err());
    }

    #[test]
    fn flipping_an_edge_flips_its_subtree() {
        let t = BalancedTree::new(4).unwrap();
        for v in 0..8 {
            let d = BitString::from_index(v, 3);
            let mut d2 = d.clone();
            d2.set(0, !d.get(0));
            let h = t.path_sums(&d).unwrap();
            let h2 = t.path_sums(&d2).unwrap();
            // e_1 lies on the paths to v_1 and v_3 only
            assert_eq!(h.xor(&h2).unwrap(), bs("101"));
        }
    }

    #[test]
    fn augmented_targets() {
        let p = augmented_target_pmf(TargetKind::MajmodParity, 3, 3).unwrap();
        assert_eq!(p.support_size(), 4);
        assert!(p.support().all(|(_, q)| q == 0.25));
        assert_eq!(p.prob_of(&bs("011")), 0.25);
        let q = augmented_target_pmf(TargetKind::Pmmajmod, 3, 3).unwrap();
        assert_eq!(q.bit_length(), 5);
        assert_eq!(q.support_size(), 16);
        assert!(augmented_target_pmf(TargetKind::MajmodParity, 30, 3).is_err());
    }

    #[test]
    fn tvd_examples() {
        let u = Pmf::uniform(3).unwrap();
        assert_eq!(total_variation(&u, &u).unwrap(), 0.0);
        let a = Pmf::point_mass(3, 0).unwrap();
        let b = Pmf::point_mass(3, 5).unwrap();
        assert_eq!(total_variation(&a, &b).unwrap(), 1.0);
        let even = Pmf::from_entries(3, (0..4u64).map(|x| ((x << 1) | (x.count_ones() as u64 & 1), 0.25))).unwrap();
        assert!((total_variation(&u, &even).unwrap() - 0.5).abs() < 1e-15);
        assert!(total_variation(&u, &Pmf::uniform(2).unwrap()).is_err());
    }

    #[test]
    fn modp_examples() {
        let r = modp_weight_pmf(9, 3, &[1; 9], 0.0).unwrap();
        let want = [170.0 / 512.0, 171.0 / 512.0, 171.0 / 512.0];
        for (a, b) in r.probs.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((r.tvd_to_uniform() - 1.0 / 768.0).abs() < 1e-15);
        assert!(r.tvd_to_uniform() <= uniformity_envelope(9, 3));
        let one = modp_weight_pmf(1, 3, &[1], 0.0).unwrap();
        assert_eq!(one.probs, vec![0.5, 0.5, 0.0]);
        let point = modp_weight_pmf(5, 7, &[1, 2, 3, 4, 5], 0.5).unwrap();
        assert_eq!(point.probs[0], 1.0);
        assert!(modp_weight_pmf(0, 3, &[], 0.0).is_err());
        assert!(modp_weight_pmf(2, 4, &[1, 1], 0.0).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(bias_entropy(0.0).unwrap(), 1.0);
        assert_eq!(bias_entropy(0.5).unwrap(), 0.0);
        assert!((bias_entropy(0.25).unwrap() - 0.811_278_124_459_132_9).abs() < 1e-12);
        assert!(bias_entropy(0.6).is_err());
        assert!(entropy_to_bias(1.5).is_err());
        assert!((entropy_to_bias(bias_entropy(0.25).unwrap()).unwrap() - 0.25).abs() < 1e-10);
    }

    #[test]
    fn primes() {
        assert_eq!(largest_prime_at_most(10.0), Some(7));
        assert_eq!(largest_prime_at_most(1.9), None);
        assert_eq!(choose_prime(100, 0.5).unwrap(), 7);
    }

    #[test]
    fn csv_round_trip() {
        let u = Pmf::uniform(1).unwrap();
        let csv = u.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(Pmf::from_csv(&csv).unwrap(), Pmf::from_entries(1, [(0, 0.5), (1, 0.5)]).unwrap());
        let p = augmented_target_pmf(TargetKind::MajmodParity, 5, 3).unwrap();
        assert_eq!(Pmf::from_json(&p.to_json()).unwrap(), p);
        let q = Pmf::from_csv(&p.to_csv()).unwrap();
        assert_eq!(total_variation(&p, &q).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_pmfs() {
        assert!(Pmf::from_entries(2, [(0, 0.5)]).is_err());
        assert!(Pmf::from_entries(2, [(4, 1.0)]).is_err());
        assert!(Pmf::from_dense(1, vec![1.5, -0.5]).is_err());
    }
}
