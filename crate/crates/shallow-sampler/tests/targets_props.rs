mod common;

use common::rng;
use proptest::prelude::*;
use rand::Rng;
use shallow_sampler::bintree::BalancedTree;
use shallow_sampler::targets::*;
use shallow_sampler::BitString;

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[test]
fn mm_and_majmod_examples() {
    assert!(!mm_int(3, 0).unwrap());
    assert!(mm_int(3, 2).unwrap());
    assert!(!mm_int(5, 7).unwrap());
    assert!(mm_int(4, 1).is_err());
    assert!(mm_int(9, 1).is_err());
    assert!(majmod_xor_parity(3, &"11".parse().unwrap()).unwrap());
    assert!(!majmod_xor_parity(3, &BitString::zeros(0)).unwrap());
    assert!(!majmod_xor_parity(5, &"10101".parse().unwrap()).unwrap());
}

#[test]
fn mm_int_is_periodic() {
    for p in [3u64, 5, 7] {
        let pi = p as i64;
        for j in -3 * pi..=3 * pi {
            assert_eq!(mm_int(p, j + pi).unwrap(), mm_int(p, j).unwrap());
        }
    }
}

#[test]
fn pmmajmod_examples() {
    let t = BalancedTree::new(4).unwrap();
    assert_eq!(signed_sum(&t, &"110".parse().unwrap(), &"101".parse().unwrap()).unwrap(), 0);
    assert!(!pmmajmod(3, &t, &"110".parse().unwrap(), &"101".parse().unwrap()).unwrap());
    assert!(pmmajmod(3, &t, &"11".parse().unwrap(), &"101".parse().unwrap()).is_err());
}

#[test]
fn pmmajmod_with_zero_edges_is_majmod() {
    for n in 2..=5 {
        let t = BalancedTree::new(n).unwrap();
        for p in [3u64, 5] {
            for xv in 0..1u64 << (n - 1) {
                let x = BitString::from_index(xv, n - 1);
                assert_eq!(pmmajmod(p, &t, &x, &BitString::zeros(n - 1)).unwrap(), majmod_xor_parity(p, &x).unwrap());
            }
        }
    }
}

#[test]
fn flipping_an_edge_flips_its_subtree() {
    let t = BalancedTree::new(4).unwrap();
    let below_e1 = [1usize, 3];
    for dv in 0..8u64 {
        for xv in 0..8u64 {
            let x = BitString::from_index(xv, 3);
            let d = BitString::from_index(dv, 3);
            let d2 = BitString::from_index(dv ^ 0b100, 3);
            let term = |v: usize, dd: &BitString| {
                let h = t.path_sums(dd).unwrap();
                if x.get(v - 1) { if h.get(v - 1) { -1i64 } else { 1 } } else { 0 }
            };
            for v in 1..4 {
                let flipped = term(v, &d) == -term(v, &d2);
                assert_eq!(flipped && term(v, &d) != 0, below_e1.contains(&v) && x.get(v - 1));
            }
            let s2: i64 = (1..4).map(|v| term(v, &d2)).sum();
            assert_eq!(signed_sum(&t, &x, &d2).unwrap(), s2);
        }
    }
}

#[test]
fn augmented_targets() {
    let a = augmented_target_pmf(TargetKind::MajmodParity, 3, 3).unwrap();
    assert_eq!(a.support_size(), 4);
    assert!(a.support().all(|(_, p)| (p - 0.25).abs() < 1e-15));
    let b = augmented_target_pmf(TargetKind::Pmmajmod, 3, 3).unwrap();
    assert_eq!(b.bit_length(), 5);
    assert_eq!(b.support_size(), 16);
    for (z, p) in b.support() {
        assert!((p - 1.0 / 16.0).abs() < 1e-15);
        let zb = BitString::from_index(z, 5);
        assert_eq!(zb.get(4), target_bit(TargetKind::Pmmajmod, 3, 3, &zb.slice(0..4)).unwrap());
    }
    assert!(augmented_target_pmf(TargetKind::Pmmajmod, 14, 3).is_err());
}

#[test]
fn tvd_examples() {
    let u = Pmf::uniform(3).unwrap();
    assert_eq!(total_variation(&u, &u).unwrap(), 0.0);
    let a = Pmf::point_mass(3, 0).unwrap();
    let b = Pmf::point_mass(3, 5).unwrap();
    assert_eq!(total_variation(&a, &b).unwrap(), 1.0);
    let par = Pmf::from_entries(3, (0..4u64).map(|x| ((x << 1) | (x.count_ones() as u64 & 1), 0.25))).unwrap();
    assert!((total_variation(&u, &par).unwrap() - 0.5).abs() < 1e-15);
    assert!(total_variation(&u, &Pmf::uniform(2).unwrap()).is_err());
}

#[test]
fn tvd_triangle_inequality() {
    let mut r = rng(5);
    let random_pmf = |r: &mut rand_chacha::ChaCha8Rng| {
        let w: Vec<f64> = (0..16).map(|_| r.gen::<f64>()).collect();
        let s: f64 = w.iter().sum();
        Pmf::from_dense(4, w.into_iter().map(|x| x / s).collect()).unwrap()
    };
    for _ in 0..20 {
        let (p, q, s) = (random_pmf(&mut r), random_pmf(&mut r), random_pmf(&mut r));
        let lhs = total_variation(&p, &s).unwrap();
        let rhs = total_variation(&p, &q).unwrap() + total_variation(&q, &s).unwrap();
        assert!(lhs <= rhs + 1e-15);
    }
}

#[test]
fn modp_examples() {
    let r = modp_weight_pmf(9, 3, &[1; 9], 0.0).unwrap();
    let want = [170.0 / 512.0, 171.0 / 512.0, 171.0 / 512.0];
    for (a, b) in r.probs.iter().zip(want) {
        assert!((a - b).abs() < 1e-15);
    }
    assert!((r.tvd_to_uniform() - 1.0 / 768.0).abs() < 1e-12);
    assert!(r.tvd_to_uniform() <= uniformity_envelope(9, 3));
    let one = modp_weight_pmf(1, 3, &[1], 0.0).unwrap();
    assert_eq!(one.probs, vec![0.5, 0.5, 0.0]);
    let point = modp_weight_pmf(5, 7, &[1; 5], 0.5).unwrap();
    assert_eq!(point.probs[0], 1.0);
    assert!(modp_weight_pmf(0, 3, &[], 0.0).is_err());
    assert!(modp_weight_pmf(2, 4, &[1, 1], 0.0).is_err());
}

#[test]
fn modp_dp_matches_binomial_counts() {
    for p in [3u64, 5, 7, 11] {
        for t in 1..=20usize {
            let r = modp_weight_pmf(t, p, &vec![1; t], 0.0).unwrap();
            assert!((r.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for res in 0..p {
                let count: f64 = (0..=t as u64).filter(|k| k % p == res).map(|k| binom(t as u64, k)).sum();
                assert!((r.probs[res as usize] - count / 2f64.powi(t as i32)).abs() < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn modp_dp_matches_enumeration(p in prop::sample::select(vec![3u64, 5, 7]), coeffs in prop::collection::vec(-20i64..20, 1..=12), bias in -0.5f64..0.5) {
        let t = coeffs.len();
        let r = modp_weight_pmf(t, p, &coeffs, bias).unwrap();
        let mut want = vec![0.0; p as usize];
        for x in 0..1u64 << t {
            let mut s = 0i64;
            let mut w = 1.0;
            for (i, a) in coeffs.iter().enumerate() {
                if (x >> i) & 1 == 1 { s += a; w *= 0.5 - bias } else { w *= 0.5 + bias }
            }
            want[s.rem_euclid(p as i64) as usize] += w;
        }
        for (a, b) in r.probs.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pmf_csv_and_json_round_trip(weights in prop::collection::vec(0.0f64..1.0, 8)) {
        let s: f64 = weights.iter().sum::<f64>() + 1e-3;
        let mut probs: Vec<f64> = weights.iter().map(|w| w / s).collect();
        probs[0] += 1e-3 / s;
        let p = Pmf::from_dense(3, probs).unwrap();
        let back = Pmf::from_csv(&p.to_csv()).unwrap();
        prop_assert!(total_variation(&p, &back).unwrap() < 1e-15);
        let back = Pmf::from_json(&p.to_json()).unwrap();
        prop_assert!(total_variation(&p, &back).unwrap() < 1e-15);
    }
}

#[test]
fn csv_format() {
    let p = Pmf::from_entries(2, [(1u64, 0.25), (2, 0.75)]).unwrap();
    let csv = p.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("bitstring,probability"));
    assert_eq!(lines.next(), Some("01,2.5000000000000000e-1"));
    assert!(!csv.contains('\r'));
    assert!(Pmf::from_csv("bitstring,probability\n01,0.5\n").is_err());
}

#[test]
fn entropy_examples() {
    assert_eq!(bias_entropy(0.0).unwrap(), 1.0);
    assert_eq!(bias_entropy(0.5).unwrap(), 0.0);
    assert!((bias_entropy(0.25).unwrap() - 0.811_278_124_459_132_9).abs() < 1e-12);
    assert!(bias_entropy(0.6).is_err());
    assert!(entropy_to_bias(1.2).is_err());
    assert!(choose_prime(100, 0.5).unwrap() == 7);
    assert_eq!(largest_prime_at_most(2.0), Some(2));
}
