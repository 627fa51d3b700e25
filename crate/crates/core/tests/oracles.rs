mod common;

use common::{coin_outcomes, enumerate_cost_law, q};
use gametree::analytics::{expected_cost, second_moment_recursion};
use gametree::branching::{offspring_law, Population};
use gametree::exact_dist::{exact_cost_pmf, z_recursion_pmf};
use gametree::{worst_input, Caps, CostPmf, LeafVector, RootBit, TreeShape};
use num_rational::BigRational;
use num_traits::Zero;

fn all_inputs(m: usize, k: u32) -> impl Iterator<Item = LeafVector> {
    let shape = TreeShape::new(m, k).unwrap();
    let n = shape.leaf_count();
    (0u64..1 << n)
        .map(move |i| LeafVector::new(shape, (0..n).map(|j| (i >> j) & 1 == 1).collect()).unwrap())
}

#[test]
fn enumeration_reproduces_hand_computed_laws() {
    let v = LeafVector::parse(2, "0101", &Caps::default()).unwrap();
    assert_eq!(
        enumerate_cost_law(&v),
        CostPmf::from_pairs([(2, q(1, 4)), (3, q(1, 2)), (4, q(1, 4))])
    );
}

#[test]
fn engine_matches_enumeration_binary_one_level() {
    for v in all_inputs(2, 1) {
        assert_eq!(
            exact_cost_pmf(&v).unwrap(),
            enumerate_cost_law(&v),
            "{}",
            v.to_bit_string()
        );
    }
}

#[test]
fn engine_matches_enumeration_ternary_one_level() {
    for v in all_inputs(3, 1) {
        assert_eq!(
            exact_cost_pmf(&v).unwrap(),
            enumerate_cost_law(&v),
            "{}",
            v.to_bit_string()
        );
    }
}

#[test]
fn engine_matches_enumeration_binary_two_levels() {
    // Every 97th input plus the two worst inputs.
    let mut picked: Vec<LeafVector> = all_inputs(2, 2).step_by(97).collect();
    picked.push(worst_input(2, 2, RootBit::One).unwrap());
    picked.push(worst_input(2, 2, RootBit::Zero).unwrap());
    for v in picked {
        assert_eq!(
            exact_cost_pmf(&v).unwrap(),
            enumerate_cost_law(&v),
            "{}",
            v.to_bit_string()
        );
    }
}

#[test]
fn engine_matches_enumeration_quaternary_gate() {
    let caps = Caps::default();
    for s in ["1111011100110001", "1111111111110000", "0100010001000100"] {
        let v = LeafVector::parse(4, s, &caps).unwrap();
        assert_eq!(exact_cost_pmf(&v).unwrap(), enumerate_cost_law(&v), "{s}");
    }
}

/// Offspring counts straight from the coin description.
fn offspring_from_coins(ty: RootBit, m: usize, coins: &[usize]) -> Population {
    let mu = m as u64;
    match ty {
        RootBit::One => Population {
            type0: coins.iter().map(|&u| u as u64).sum(),
            type1: mu,
        },
        RootBit::Zero => {
            let u0 = coins[0];
            Population {
                type0: mu + coins[1..=u0].iter().map(|&u| u as u64).sum::<u64>(),
                type1: u0 as u64,
            }
        }
    }
}

#[test]
fn offspring_laws_match_coin_enumeration() {
    for m in 2..=4usize {
        for ty in [RootBit::Zero, RootBit::One] {
            let outcomes = coin_outcomes(m, m);
            let w = q(1, outcomes.len() as i64);
            let mut expected: std::collections::BTreeMap<Population, BigRational> =
                Default::default();
            for c in &outcomes {
                *expected
                    .entry(offspring_from_coins(ty, m, c))
                    .or_insert_with(BigRational::zero) += &w;
            }
            let mut got = offspring_law::<BigRational>(ty, m);
            got.sort();
            let expected: Vec<_> = expected.into_iter().collect();
            assert_eq!(got, expected, "m={m} {ty:?}");
        }
    }
}

#[test]
fn one_level_cost_is_the_offspring_total() {
    for m in 2..=4usize {
        for ty in [RootBit::Zero, RootBit::One] {
            let v = worst_input(m, 1, ty).unwrap();
            let total = CostPmf::from_pairs(
                offspring_law::<BigRational>(ty, m)
                    .into_iter()
                    .map(|(p, w)| (p.total(), w)),
            );
            assert_eq!(exact_cost_pmf(&v).unwrap(), total, "m={m} {ty:?}");
        }
    }
}

#[test]
fn moment_recursion_matches_exact_laws() {
    for (m, k_max) in [(2usize, 3u32), (3, 2)] {
        let states = second_moment_recursion(m, k_max).unwrap();
        for state in &states {
            let k = state.k;
            let zero = exact_cost_pmf(&worst_input(m, k, RootBit::Zero).unwrap()).unwrap();
            let one = exact_cost_pmf(&worst_input(m, k, RootBit::One).unwrap()).unwrap();
            assert_eq!(state.mean, [zero.mean(), one.mean()], "m={m} k={k}");
            assert_eq!(state.variance_zero(), zero.variance(), "m={m} k={k}");
            assert_eq!(state.variance_one(), one.variance(), "m={m} k={k}");
            let joint = z_recursion_pmf(m, k, &Caps::default()).unwrap();
            let cross = joint.mixed_moment(0, 1);
            assert_eq!(cross, state.second[1], "m={m} k={k}");
            assert_eq!(expected_cost(m, k, RootBit::One).unwrap(), one.mean());
        }
    }
}
