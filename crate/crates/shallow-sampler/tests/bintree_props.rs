mod common;

use common::rng;
use proptest::prelude::*;
use shallow_sampler::adversary::{tree_forest_decomposition, verify_decomposition, LocalFunction};
use shallow_sampler::bintree::*;
use shallow_sampler::BitString;
use std::collections::BTreeSet;

/// Parity of the edge bits on the way up from `v_i`, by walking parents.
fn h_oracle(n: usize, d: &BitString) -> BitString {
    BitString::new(
        (1..n)
            .map(|i| {
                let mut v = i;
                let mut acc = false;
                while v > 0 {
                    acc ^= d.get(v - 1);
                    v = (v - 1) / 2;
                }
                acc
            })
            .collect(),
    )
}

#[test]
fn small_examples() {
    let t4 = build_tree(4).unwrap();
    assert_eq!(t4.parent(3), Some(1));
    assert_eq!(t4.root_path(3).unwrap(), vec![1, 3]);
    assert_eq!(t4.root_path(2).unwrap(), vec![2]);
    assert_eq!(build_tree(7).unwrap().root_path(6).unwrap(), vec![2, 6]);
    assert_eq!(build_tree(7).unwrap().n_layers(), 3);
    assert!(build_tree(1).is_err());
    assert!(t4.root_path(0).is_err());
    assert!(t4.root_path(4).is_err());
    let d: BitString = "101".parse().unwrap();
    assert_eq!(t4.path_sums(&d).unwrap().to_string(), "100");
    assert!(t4.path_sums(&BitString::zeros(2)).is_err());
}

#[test]
fn path_sums_linear_bijective_and_match_walk() {
    for n in 2..=6 {
        let t = build_tree(n).unwrap();
        let e = n - 1;
        let mut images = BTreeSet::new();
        for a in 0..1u64 << e {
            let da = BitString::from_index(a, e);
            let ha = t.path_sums(&da).unwrap();
            assert_eq!(ha, h_oracle(n, &da));
            assert_eq!(t.path_sums_inverse(&ha).unwrap(), da);
            images.insert(ha.index());
            for b in 0..1u64 << e {
                let db = BitString::from_index(b, e);
                let lhs = t.path_sums(&da.xor(&db).unwrap()).unwrap();
                let rhs = ha.xor(&t.path_sums(&db).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
        assert_eq!(images.len(), 1 << e);
    }
}

#[test]
fn partition_examples() {
    let t15 = build_tree(15).unwrap();
    let p = layer_partition(&t15, 2).unwrap();
    assert_eq!(p.d_layers, 2);
    assert_eq!(p.top_vertices, vec![0, 1, 2]);
    assert_eq!(p.k(), 4);
    assert!(p.small_trees.iter().all(|s| s.vertices.len() == 3));
    let p7 = layer_partition(&build_tree(7).unwrap(), 1).unwrap();
    assert_eq!(p7.k(), 4);
    assert!(p7.small_trees.iter().all(|s| s.vertices.len() == 1));
    assert!(layer_partition(&build_tree(7).unwrap(), 4).is_err());
    assert!(layer_partition(&build_tree(7).unwrap(), 0).is_err());
}

#[test]
fn partition_covers_every_variable_once() {
    for n in 3..=40 {
        let t = build_tree(n).unwrap();
        for d in 1..=4 {
            let Ok(p) = layer_partition(&t, d) else { continue };
            let mut count = 0;
            let mut seen = BTreeSet::new();
            for j in 0..=p.k() {
                let vars = p.tree_vars(j);
                count += vars.len();
                for v in &vars {
                    assert_eq!(p.tree_of(*v), j);
                }
                seen.extend(vars);
            }
            assert_eq!(count, t.n_vars(), "n={n} d={d}");
            assert_eq!(seen, t.all_vars());
            let cap = (1usize << p.d_layers) - 1;
            for s in &p.small_trees {
                assert!(s.vertices.len() <= cap);
                assert!(s.vertices.len() < 4 * d);
                if d.is_power_of_two() {
                    assert!(s.vertices.len() <= 2 * d);
                }
                let edges = p.tree_vars(p.tree_of(TreeVar::Vertex(s.root))).iter().filter(|v| matches!(v, TreeVar::Edge(_))).count();
                assert_eq!(edges, s.vertices.len());
            }
        }
    }
}

#[test]
fn neighborhood_examples() {
    let t = build_tree(15).unwrap();
    let p = layer_partition(&t, 2).unwrap();
    assert!(tree_neighborhood(&p, &BTreeSet::new()).is_empty());
    let root2 = p.small_trees[1].root;
    let one: BTreeSet<_> = [TreeVar::Vertex(root2)].into();
    assert_eq!(tree_neighborhood(&p, &one), p.tree_vars(2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn neighborhood_idempotent(mask in any::<u32>()) {
        let t = build_tree(15).unwrap();
        let p = layer_partition(&t, 2).unwrap();
        let vars: BTreeSet<TreeVar> = t.all_vars().into_iter().enumerate().filter(|(k, _)| mask >> (k % 32) & 1 == 1).map(|(_, v)| v).collect();
        let once = tree_neighborhood(&p, &vars);
        prop_assert!(vars.is_subset(&once));
        prop_assert_eq!(tree_neighborhood(&p, &once), once);
    }

    #[test]
    fn forest_decomposition_is_valid(seed in any::<u64>(), d in 1usize..=2, l in 4usize..=12) {
        let n = 15;
        let t = build_tree(n).unwrap();
        let p = layer_partition(&t, d).unwrap();
        let f = LocalFunction::random(l, t.n_vars() + 1, d, &mut rng(seed)).unwrap();
        let (dec, forests) = tree_forest_decomposition(&f, &p).unwrap();
        let report = validate_forest_partition(&forests, &p);
        prop_assert!(report.valid, "{:?}", report.violations);
        prop_assert_eq!(forests.s(), dec.s());
        for i in 1..forests.forests.len() {
            prop_assert!(forests.forests[i].len() <= shallow_sampler::adversary::forest_size_bound(d, p.d_layers));
        }
        verify_decomposition(&f, &dec).unwrap();
    }
}

#[test]
fn validation_flags_split_tree() {
    let t = build_tree(7).unwrap();
    let p = layer_partition(&t, 1).unwrap();
    let all = ForestPartition { forests: vec![t.all_vars()], controlling_inputs: vec![] };
    assert!(validate_forest_partition(&all, &p).valid);
    let mut f0 = t.all_vars();
    f0.remove(&TreeVar::Vertex(3));
    let bad = ForestPartition { forests: vec![f0, [TreeVar::Vertex(3)].into()], controlling_inputs: vec![0] };
    let report = validate_forest_partition(&bad, &p);
    assert!(!report.valid);
    assert!(report.violations.iter().any(|v| matches!(v, Violation::SplitTree { forest: 0, .. } | Violation::SplitTree { forest: 1, .. })));
}
