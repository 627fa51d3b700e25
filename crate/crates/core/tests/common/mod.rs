#![allow(dead_code)]

use std::collections::BTreeMap;

use gametree::rng::UniformSource;
use gametree::{snir_eval, CostPmf, LeafVector};
use num_bigint::BigInt;
use num_rational::BigRational;

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Replays a fixed prefix of choices, then answers 0 while recording the
/// bound of every draw.
pub struct Scripted {
    prefix: Vec<usize>,
    pos: usize,
    pub bounds: Vec<usize>,
    pub taken: Vec<usize>,
}

impl Scripted {
    pub fn new(prefix: Vec<usize>) -> Self {
        Scripted {
            prefix,
            pos: 0,
            bounds: Vec::new(),
            taken: Vec::new(),
        }
    }
}

impl UniformSource for Scripted {
    fn below(&mut self, bound: usize) -> usize {
        let c = self.prefix.get(self.pos).copied().unwrap_or(0);
        assert!(c < bound);
        self.pos += 1;
        self.bounds.push(bound);
        self.taken.push(c);
        c
    }
}

/// Exact cost law of the evaluator, by walking every sequence of random
/// choices it can make.
pub fn enumerate_cost_law(v: &LeafVector) -> CostPmf {
    // (cost, 1/probability) -> number of paths
    let mut paths: BTreeMap<(u64, u128), u64> = BTreeMap::new();
    let mut prefix: Vec<usize> = Vec::new();
    loop {
        let mut src = Scripted::new(prefix.clone());
        let out = snir_eval(v, &mut src);
        let inv: u128 = src.bounds.iter().map(|&b| b as u128).product();
        *paths.entry((out.leaves_read as u64, inv)).or_default() += 1;
        // Odometer over the choice tree, innermost draw first.
        let mut taken = src.taken;
        let bounds = src.bounds;
        loop {
            match taken.pop() {
                None => {
                    return CostPmf::from_pairs(paths.into_iter().map(|((c, inv), n)| {
                        (c, BigRational::new(BigInt::from(n), BigInt::from(inv)))
                    }))
                }
                Some(c) if c + 1 < bounds[taken.len()] => {
                    taken.push(c + 1);
                    break;
                }
                Some(_) => {}
            }
        }
        prefix = taken;
    }
}

/// Every outcome of `count` i.i.d. uniform coins on `0..m`; each has
/// probability `m^-count`.
pub fn coin_outcomes(m: usize, count: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..count {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..m).map(move |c| {
                    let mut p = prefix.clone();
                    p.push(c);
                    p
                })
            })
            .collect();
    }
    out
}

/// Chi-square goodness-of-fit p-value of observed costs against `law`.
/// Adjacent cells are pooled until each expects at least 5 hits.
pub fn chi_square_p_value(samples: &[u64], law: &CostPmf) -> f64 {
    use num_traits::ToPrimitive;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    let n = samples.len() as f64;
    let mut observed: BTreeMap<u64, u64> = BTreeMap::new();
    for &s in samples {
        *observed.entry(s).or_default() += 1;
    }
    assert!(
        observed.keys().all(|c| law.entries().contains_key(c)),
        "sample outside the support"
    );
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut exp, mut obs) = (0.0, 0.0);
    for (c, p) in law.entries() {
        exp += p.to_f64().unwrap() * n;
        obs += observed.get(c).copied().unwrap_or(0) as f64;
        if exp >= 5.0 {
            cells.push((obs, exp));
            exp = 0.0;
            obs = 0.0;
        }
    }
    match cells.last_mut() {
        Some(last) => {
            last.0 += obs;
            last.1 += exp;
        }
        None => return 1.0,
    }
    if cells.len() < 2 {
        return 1.0;
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dist = ChiSquared::new((cells.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}
