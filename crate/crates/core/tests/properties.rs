mod common;

use common::q;
use gametree::analytics::expected_cost;
use gametree::exact_dist::exact_cost_pmf;
use gametree::rng::seeded_rng;
use gametree::tree::snir_eval_with;
use gametree::{
    dominates, root_value, snir_eval, worst_input, CostPmf, LeafVector, RootBit, TreeShape,
};
use num_rational::BigRational;
use proptest::prelude::*;

fn leaf_vector() -> impl Strategy<Value = LeafVector> {
    (2usize..=4, 0u32..=2)
        .prop_filter("at most 64 leaves", |&(m, k)| m.pow(2 * k) <= 64)
        .prop_flat_map(|(m, k)| {
            let shape = TreeShape::new(m, k).unwrap();
            prop::collection::vec(any::<bool>(), shape.leaf_count())
                .prop_map(move |bits| LeafVector::new(shape, bits).unwrap())
        })
}

fn small_pmf() -> impl Strategy<Value = CostPmf> {
    prop::collection::btree_map(0u64..8, 1i64..6, 1..5).prop_map(|w| {
        let total: i64 = w.values().sum();
        CostPmf::from_pairs(w.into_iter().map(|(c, x)| (c, q(x, total))))
    })
}

/// Reorder the children of the root by `perm`.
fn permute_root(v: &LeafVector, perm: &[usize]) -> LeafVector {
    let m = v.shape().arity();
    let block = v.shape().leaf_count() / m;
    let bits: Vec<bool> = perm
        .iter()
        .flat_map(|&c| v.bits()[c * block..(c + 1) * block].iter().copied())
        .collect();
    LeafVector::new(*v.shape(), bits).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn evaluation_returns_the_root_value(v in leaf_vector(), seed in any::<u64>()) {
        let out = snir_eval_with(&v, &mut seeded_rng(seed), true);
        prop_assert_eq!(out.root_bit, root_value(&v));
        let read = out.read_set.unwrap();
        prop_assert_eq!(read.len(), out.leaves_read);
        prop_assert!(read.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(out.leaves_read >= 1 && out.leaves_read <= v.shape().leaf_count());
    }

    #[test]
    fn cost_lies_in_the_support_of_the_exact_law(v in leaf_vector(), seed in any::<u64>()) {
        let law = exact_cost_pmf(&v).unwrap();
        prop_assert_eq!(law.total(), q(1, 1));
        let cost = snir_eval(&v, &mut seeded_rng(seed)).leaves_read as u64;
        prop_assert!(law.prob(cost) > q(0, 1));
    }

    #[test]
    fn law_is_invariant_under_child_reordering(
        v in leaf_vector().prop_filter("internal root", |v| v.shape().half_height() > 0),
        perm_seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let m = v.shape().arity();
        let mut perm: Vec<usize> = (0..m).collect();
        perm.shuffle(&mut seeded_rng(perm_seed));
        let w = permute_root(&v, &perm);
        prop_assert_eq!(exact_cost_pmf(&v).unwrap(), exact_cost_pmf(&w).unwrap());
    }

    #[test]
    fn worst_inputs_dominate(v in leaf_vector()) {
        let shape = v.shape();
        let (m, k) = (shape.arity(), shape.half_height());
        let law = exact_cost_pmf(&v).unwrap();
        let one = exact_cost_pmf(&worst_input(m, k, RootBit::One).unwrap()).unwrap();
        prop_assert!(dominates(&law, &one));
        if !root_value(&v) {
            let zero = exact_cost_pmf(&worst_input(m, k, RootBit::Zero).unwrap()).unwrap();
            prop_assert!(dominates(&law, &zero));
        }
    }

    #[test]
    fn dominance_is_reflexive_and_transitive(a in small_pmf(), b in small_pmf(), c in small_pmf()) {
        prop_assert!(dominates(&a, &a));
        if dominates(&a, &b) && dominates(&b, &c) {
            prop_assert!(dominates(&a, &c));
        }
        if dominates(&a, &b) && dominates(&b, &a) {
            prop_assert_eq!(&a, &b);
        }
    }

    #[test]
    fn dominance_is_preserved_by_convolution(a in small_pmf(), b in small_pmf(), c in small_pmf()) {
        if dominates(&a, &b) {
            prop_assert!(dominates(&a.convolve(&c), &b.convolve(&c)));
        }
    }

    #[test]
    fn worst_input_mean_is_the_expected_cost(m in 2usize..=3, k in 0u32..=2, root in any::<bool>()) {
        let root = RootBit::from(root);
        let v = worst_input(m, k, root).unwrap();
        prop_assert_eq!(root_value(&v), root.value());
        let mean: BigRational = exact_cost_pmf(&v).unwrap().mean();
        prop_assert_eq!(mean, expected_cost(m, k, root).unwrap());
    }
}
