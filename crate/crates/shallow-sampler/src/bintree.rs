//! Heap-shaped binary trees, path parities and the layer partition into a
//! top tree plus small subtrees.
//!
//! Vertex `v_i` has parent `⌊(i−1)/2⌋`; edge `e_i` joins `v_i` to its parent
//! for `i ∈ [1, n−1]`. The tree variables are the edge bits `d_i` and the
//! non-root vertex bits `x_i`; in flattened layouts they are ordered
//! `(d_1 … d_{n−1}, x_1 … x_{n−1})`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BalancedTree {
    n_vertices: usize,
}

impl BalancedTree {
    pub fn new(n_vertices: usize) -> Result<Self> {
        if n_vertices < 2 {
            return Err(Error::InvalidParameter(format!("a tree needs at least 2 vertices, got {n_vertices}")));
        }
        Ok(BalancedTree { n_vertices })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.n_vertices - 1
    }

    /// Number of tree variables, `2(n − 1)`.
    pub fn n_vars(&self) -> usize {
        2 * self.n_edges()
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        (i > 0 && i < self.n_vertices).then(|| (i - 1) / 2)
    }

    pub fn children(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        [2 * i + 1, 2 * i + 2].into_iter().filter(move |&c| c < self.n_vertices)
    }

    pub fn depth(&self, i: usize) -> usize {
        (usize::BITS - 1 - (i + 1).leading_zeros()) as usize
    }

    pub fn n_layers(&self) -> usize {
        self.depth(self.n_vertices - 1) + 1
    }

    /// Edge indices on the path from the root to `v_i`, ascending.
    pub fn root_path(&self, i: usize) -> Result<Vec<usize>> {
        if i == 0 || i >= self.n_vertices {
            return Err(Error::IndexOutOfRange { index: i, n_qubits: self.n_vertices });
        }
        let mut path = Vec::new();
        let mut v = i;
        while v > 0 {
            path.push(v);
            v = (v - 1) / 2;
        }
        path.reverse();
        Ok(path)
    }

    /// `h(d)_i = ⊕_{e_j ∈ P(v_i)} d_j`, both strings indexed by `i − 1`.
    pub fn path_sums(&self, d: &BitString) -> Result<BitString> {
        self.check_len(d)?;
        let mut h = BitString::zeros(self.n_edges());
        for i in 1..self.n_vertices {
            let up = if i <= 2 { false } else { h.get((i - 1) / 2 - 1) };
            h.set(i - 1, d.get(i - 1) ^ up);
        }
        Ok(h)
    }

    /// Inverse of [`path_sums`](Self::path_sums): `d_i = h_i ⊕ h_{parent(i)}`.
    pub fn path_sums_inverse(&self, h: &BitString) -> Result<BitString> {
        self.check_len(h)?;
        let mut d = BitString::zeros(self.n_edges());
        for i in 1..self.n_vertices {
            let up = if i <= 2 { false } else { h.get((i - 1) / 2 - 1) };
            d.set(i - 1, h.get(i - 1) ^ up);
        }
        Ok(d)
    }

    fn check_len(&self, s: &BitString) -> Result<()> {
        if s.len() != self.n_edges() {
            return Err(Error::LengthMismatch { expected: self.n_edges(), got: s.len() });
        }
        Ok(())
    }

    /// Position of a tree variable in the `(d, x)` layout.
    pub fn var_index(&self, var: TreeVar) -> usize {
        match var {
            TreeVar::Edge(i) => i - 1,
            TreeVar::Vertex(i) => self.n_edges() + i - 1,
        }
    }

    pub fn var_at(&self, index: usize) -> TreeVar {
        let e = self.n_edges();
        if index < e {
            TreeVar::Edge(index + 1)
        } else {
            TreeVar::Vertex(index - e + 1)
        }
    }

    pub fn all_vars(&self) -> BTreeSet<TreeVar> {
        (0..self.n_vars()).map(|i| self.var_at(i)).collect()
    }

    fn is_valid_var(&self, var: TreeVar) -> bool {
        let i = var.vertex();
        i >= 1 && i < self.n_vertices
    }
}

/// A tree variable: an edge bit `d_i` or a non-root vertex bit `x_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TreeVar {
    Edge(usize),
    Vertex(usize),
}

impl TreeVar {
    /// The vertex this variable hangs off (`e_i` belongs with `v_i`).
    pub fn vertex(self) -> usize {
        match self {
            TreeVar::Edge(i) | TreeVar::Vertex(i) => i,
        }
    }
}

impl fmt::Display for TreeVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeVar::Edge(i) => write!(f, "e{i}"),
            TreeVar::Vertex(i) => write!(f, "v{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmallTree {
    pub root: usize,
    pub vertices: Vec<usize>,
}

/// Top tree `T_0` plus the small trees `T_1 … T_k` rooted `D` layers above
/// the bottom. Each small tree owns the edge into its root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreePartition {
    pub tree: BalancedTree,
    pub d_layers: usize,
    pub top_vertices: Vec<usize>,
    pub small_trees: Vec<SmallTree>,
    /// `owner[v]` is 0 for the top tree and `j` for small tree `T_j`.
    owner: Vec<usize>,
}

impl TreePartition {
    pub fn k(&self) -> usize {
        self.small_trees.len()
    }

    /// Index of the tree containing `var` (0 for the top tree).
    pub fn tree_of(&self, var: TreeVar) -> usize {
        self.owner[var.vertex()]
    }

    /// All variables of tree `j`.
    pub fn tree_vars(&self, j: usize) -> BTreeSet<TreeVar> {
        let verts: &[usize] = if j == 0 { &self.top_vertices } else { &self.small_trees[j - 1].vertices };
        verts
            .iter()
            .filter(|&&v| v > 0)
            .flat_map(|&v| [TreeVar::Edge(v), TreeVar::Vertex(v)])
            .collect()
    }
}

/// Smallest `D` with `2^D ≥ 2d`.
pub fn small_tree_layers(d_locality: usize) -> usize {
    let target = 2 * d_locality.max(1);
    let mut layers = 0;
    while (1usize << layers) < target {
        layers += 1;
    }
    layers
}

pub fn build_tree(n: usize) -> Result<BalancedTree> {
    BalancedTree::new(n)
}

pub fn layer_partition(tree: &BalancedTree, d_locality: usize) -> Result<TreePartition> {
    if d_locality == 0 {
        return Err(Error::InvalidParameter("locality must be positive".into()));
    }
    let d_layers = small_tree_layers(d_locality);
    let layers = tree.n_layers();
    if d_layers >= layers {
        return Err(Error::TreeTooShallow { layers, d_layers });
    }
    let cut = layers - d_layers;
    let n = tree.n_vertices();
    let mut owner = vec![0usize; n];
    let mut top_vertices = Vec::new();
    let mut small_trees = Vec::new();
    for v in 0..n {
        let depth = tree.depth(v);
        if depth < cut {
            top_vertices.push(v);
        } else if depth == cut {
            let id = small_trees.len() + 1;
            let mut vertices = Vec::new();
            let mut stack = vec![v];
            while let Some(u) = stack.pop() {
                vertices.push(u);
                owner[u] = id;
                stack.extend(tree.children(u));
            }
            vertices.sort_unstable();
            small_trees.push(SmallTree { root: v, vertices });
        }
    }
    Ok(TreePartition { tree: *tree, d_layers, top_vertices, small_trees, owner })
}

/// `N_𝒯(vars)`: the union of the whole trees touched by `vars`.
pub fn tree_neighborhood(partition: &TreePartition, vars: &BTreeSet<TreeVar>) -> BTreeSet<TreeVar> {
    let trees: BTreeSet<usize> = vars.iter().map(|&v| partition.tree_of(v)).collect();
    trees.into_iter().flat_map(|j| partition.tree_vars(j)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestPartition {
    pub forests: Vec<BTreeSet<TreeVar>>,
    pub controlling_inputs: Vec<usize>,
}

impl ForestPartition {
    pub fn s(&self) -> usize {
        self.forests.len().saturating_sub(1)
    }

    /// Which forest holds `var`, if any.
    pub fn forest_of(&self, var: TreeVar) -> Option<usize> {
        self.forests.iter().position(|f| f.contains(&var))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    UnknownVariable { var: TreeVar },
    Missing { var: TreeVar },
    Duplicated { var: TreeVar },
    SplitTree { forest: usize, tree: usize },
    TopTreeOutsideF0 { forest: usize },
    ControllerCount { forests: usize, controllers: usize },
    NoForests,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownVariable { var } => write!(f, "unknown variable {var}"),
            Violation::Missing { var } => write!(f, "variable {var} is in no forest"),
            Violation::Duplicated { var } => write!(f, "variable {var} is in several forests"),
            Violation::SplitTree { forest, tree } => write!(f, "forest F_{forest} holds only part of tree T_{tree}"),
            Violation::TopTreeOutsideF0 { forest } => write!(f, "forest F_{forest} touches the top tree"),
            Violation::ControllerCount { forests, controllers } => {
                write!(f, "{forests} forests but {controllers} controlling inputs")
            }
            Violation::NoForests => write!(f, "no forests given"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForestValidation {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

pub fn validate_forest_partition(partition: &ForestPartition, tp: &TreePartition) -> ForestValidation {
    let tree = &tp.tree;
    let mut violations = Vec::new();
    if partition.forests.is_empty() {
        violations.push(Violation::NoForests);
        return ForestValidation { valid: false, violations };
    }
    if partition.controlling_inputs.len() != partition.s() {
        violations.push(Violation::ControllerCount {
            forests: partition.forests.len(),
            controllers: partition.controlling_inputs.len(),
        });
    }
    let mut seen = BTreeSet::new();
    for forest in &partition.forests {
        for &var in forest {
            if !tree.is_valid_var(var) {
                violations.push(Violation::UnknownVariable { var });
            } else if !seen.insert(var) {
                violations.push(Violation::Duplicated { var });
            }
        }
    }
    for var in tree.all_vars() {
        if !seen.contains(&var) {
            violations.push(Violation::Missing { var });
        }
    }
    for (i, forest) in partition.forests.iter().enumerate() {
        let valid_vars: BTreeSet<TreeVar> = forest.iter().copied().filter(|&v| tree.is_valid_var(v)).collect();
        let trees: BTreeSet<usize> = valid_vars.iter().map(|&v| tp.tree_of(v)).collect();
        for j in trees {
            if i >= 1 && j == 0 {
                violations.push(Violation::TopTreeOutsideF0 { forest: i });
            } else if i >= 1 && !tp.tree_vars(j).is_subset(&valid_vars) {
                violations.push(Violation::SplitTree { forest: i, tree: j });
            }
        }
    }
    ForestValidation { valid: violations.is_empty(), violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn build_examples() {
        assert!(build_tree(1).is_err());
        let t = build_tree(2).unwrap();
        assert_eq!(t.n_edges(), 1);
        assert_eq!(build_tree(4).unwrap().parent(3), Some(1));
        let t7 = build_tree(7).unwrap();
        assert_eq!(t7.n_layers(), 3);
        assert_eq!(t7.children(2).collect::<Vec<_>>(), vec![5, 6]);
    }

    #[test]
    fn root_paths() {
        let t = build_tree(4).unwrap();
        assert_eq!(t.root_path(3).unwrap(), vec![1, 3]);
        assert_eq!(t.root_path(2).unwrap(), vec![2]);
        assert_eq!(build_tree(7).unwrap().root_path(6).unwrap(), vec![2, 6]);
        assert!(t.root_path(0).is_err());
        assert!(t.root_path(4).is_err());
    }

    #[test]
    fn path_sum_examples() {
        let t = build_tree(4).unwrap();
        assert_eq!(t.path_sums(&bs("000")).unwrap(), bs("000"));
        assert_eq!(t.path_sums(&bs("101")).unwrap(), bs("100"));
        assert!(t.path_sums(&bs("10")).is_err());
        let mut images = BTreeSet::new();
        for v in 0..8 {
            let d = BitString::from_index(v, 3);
            let h = t.path_sums(&d).unwrap();
            assert_eq!(t.path_sums_inverse(&h).unwrap(), d);
            images.insert(h);
        }
        assert_eq!(images.len(), 8);
    }

    #[test]
    fn path_sums_match_root_paths() {
        let t = build_tree(11).unwrap();
        for v in 0..(1u64 << 10) {
            let d = BitString::from_index(v, 10);
            let h = t.path_sums(&d).unwrap();
            for i in 1..11 {
                let want = t.root_path(i).unwrap().iter().fold(false, |acc, &e| acc ^ d.get(e - 1));
                assert_eq!(h.get(i - 1), want);
            }
        }
    }

    #[test]
    fn partition_examples() {
        let p = layer_partition(&build_tree(15).unwrap(), 2).unwrap();
        assert_eq!(p.d_layers, 2);
        assert_eq!(p.top_vertices, vec![0, 1, 2]);
        assert_eq!(p.k(), 4);
        assert!(p.small_trees.iter().all(|t| t.vertices.len() == 3));
        assert_eq!(p.small_trees[0].vertices, vec![3, 7, 8]);

        let p = layer_partition(&build_tree(7).unwrap(), 1).unwrap();
        assert_eq!(p.k(), 4);
        assert!(p.small_trees.iter().all(|t| t.vertices.len() == 1));
        assert_eq!(p.tree_vars(1), [TreeVar::Edge(3), TreeVar::Vertex(3)].into_iter().collect());

        assert!(matches!(layer_partition(&build_tree(7).unwrap(), 4), Err(Error::TreeTooShallow { .. })));
    }

    #[test]
    fn neighborhoods() {
        let p = layer_partition(&build_tree(15).unwrap(), 2).unwrap();
        assert!(tree_neighborhood(&p, &BTreeSet::new()).is_empty());
        let one: BTreeSet<_> = [TreeVar::Vertex(9)].into_iter().collect();
        let nb = tree_neighborhood(&p, &one);
        assert_eq!(nb, p.tree_vars(2));
        assert_eq!(nb.len(), 6);
    }

    #[test]
    fn forest_validation() {
        let t = build_tree(15).unwrap();
        let p = layer_partition(&t, 2).unwrap();
        let all = ForestPartition { forests: vec![t.all_vars()], controlling_inputs: vec![] };
        assert!(validate_forest_partition(&all, &p).valid);

        let mut f0 = t.all_vars();
        let mut f1 = BTreeSet::new();
        f0.remove(&TreeVar::Vertex(7));
        f1.insert(TreeVar::Vertex(7));
        let split = ForestPartition { forests: vec![f0, f1], controlling_inputs: vec![0] };
        let v = validate_forest_partition(&split, &p);
        assert!(!v.valid);
        assert!(v.violations.contains(&Violation::SplitTree { forest: 1, tree: 1 }));
    }
}
