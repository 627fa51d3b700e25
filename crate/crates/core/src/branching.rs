//! The two-type Galton–Watson process behind the worst-case cost, and a
//! seeded Monte Carlo harness on top of it.
//!
//! An individual is a node read by the evaluator at an even depth; its type
//! is the node's value. With `U, U_0, U_r` i.i.d. uniform on `{0, …, m-1}`:
//!
//! - type 1 begets `m` of type 1 and `Σ_{r=1}^{m} U_r` of type 0;
//! - type 0 begets `U_0` of type 1 and `m + Σ_{r=1}^{U_0} U_r` of type 0.
//!
//! The generation-`k` total has the law of the cost on the worst input of
//! half-height `k` with root value equal to the ancestor's type.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{expected_cost, spectral};
use crate::error::{check_cap, invalid, Result};
use crate::pmf::{CostPmf, Probability};
use crate::rng::{run_rng, UniformSource};
use crate::worst_case::RootBit;
use crate::Caps;

/// Head counts by type.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct Population {
    pub type0: u64,
    pub type1: u64,
}

impl Population {
    pub fn founder(start: RootBit) -> Self {
        match start {
            RootBit::Zero => Population { type0: 1, type1: 0 },
            RootBit::One => Population { type0: 0, type1: 1 },
        }
    }

    pub fn total(&self) -> u64 {
        self.type0 + self.type1
    }
}

fn sum_uniform<S: UniformSource + ?Sized>(m: usize, count: u64, rng: &mut S) -> u64 {
    (0..count).map(|_| rng.below(m) as u64).sum()
}

/// Offspring of one individual.
pub fn offspring<S: UniformSource + ?Sized>(ty: RootBit, m: usize, rng: &mut S) -> Population {
    let mu = m as u64;
    match ty {
        RootBit::One => Population {
            type1: mu,
            type0: sum_uniform(m, mu, rng),
        },
        RootBit::Zero => {
            let u0 = rng.below(m) as u64;
            Population {
                type1: u0,
                type0: mu + sum_uniform(m, u0, rng),
            }
        }
    }
}

/// Exact offspring law as `(offspring, probability)` pairs.
pub fn offspring_law<P: Probability>(ty: RootBit, m: usize) -> Vec<(Population, P)> {
    let uniform = CostPmf::from_pairs((0..m as u64).map(|u| (u, P::ratio(1, m as u64))));
    let mu = m as u64;
    match ty {
        RootBit::One => uniform
            .power(m)
            .entries()
            .iter()
            .map(|(&a, p)| {
                (
                    Population {
                        type0: a,
                        type1: mu,
                    },
                    p.clone(),
                )
            })
            .collect(),
        RootBit::Zero => {
            let mut out = Vec::new();
            let mut sum = CostPmf::<P>::point(0);
            for u0 in 0..mu {
                let w = P::ratio(1, mu);
                for (&a, p) in sum.entries() {
                    out.push((
                        Population {
                            type0: mu + a,
                            type1: u0,
                        },
                        w.clone() * p.clone(),
                    ));
                }
                sum = sum.convolve(&uniform);
            }
            out
        }
    }
}

/// Run `k` generations from a single founder.
pub fn simulate<S: UniformSource + ?Sized>(
    m: usize,
    k: u32,
    start: RootBit,
    rng: &mut S,
    caps: &Caps,
) -> Result<Population> {
    if m < 2 {
        return Err(invalid(format!("arity must be at least 2, got {m}")));
    }
    let mut pop = Population::founder(start);
    for _ in 0..k {
        let mut next = Population::default();
        for _ in 0..pop.type1 {
            let o = offspring(RootBit::One, m, rng);
            next.type0 += o.type0;
            next.type1 += o.type1;
        }
        for _ in 0..pop.type0 {
            let o = offspring(RootBit::Zero, m, rng);
            next.type0 += o.type0;
            next.type1 += o.type1;
        }
        check_cap(
            "max-population",
            next.total() as u128,
            caps.max_population as u128,
        )?;
        pop = next;
    }
    Ok(pop)
}

/// Parameters of a Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub m: usize,
    pub k: u32,
    pub start: RootBit,
    pub runs: u64,
    pub seed: u64,
    /// Thresholds `t` for the exceedance frequencies of `(C - E C)/n^α`.
    pub tail_grid: Vec<f64>,
}

impl MonteCarloConfig {
    pub const DEFAULT_TAIL_GRID: [f64; 5] = [0.25, 0.5, 1.0, 1.5, 2.0];

    pub fn new(m: usize, k: u32, start: RootBit, runs: u64, seed: u64) -> Self {
        MonteCarloConfig {
            m,
            k,
            start,
            runs,
            seed,
            tail_grid: Self::DEFAULT_TAIL_GRID.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub t: f64,
    pub frequency: f64,
}

/// Summary of a Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloStats {
    pub m: usize,
    pub k: u32,
    pub start: RootBit,
    pub runs: u64,
    pub seed: u64,
    pub mean: f64,
    /// Unbiased sample variance; `None` for a single run.
    pub variance: Option<f64>,
    /// Exact `E C` the tail frequencies are centred on.
    pub expected_mean: f64,
    /// `n^α = λ1^k`.
    pub normalizer: f64,
    pub empirical_tail: Vec<TailPoint>,
}

impl MonteCarloStats {
    /// Standard error of the sample mean.
    pub fn standard_error(&self) -> Option<f64> {
        self.variance.map(|v| (v / self.runs as f64).sqrt())
    }
}

/// Total cost of every run, in run order. Run `r` uses
/// [`run_rng`]`(seed, r)`, so the result does not depend on scheduling.
pub fn monte_carlo_totals(cfg: &MonteCarloConfig, caps: &Caps) -> Result<Vec<u64>> {
    if cfg.runs == 0 {
        return Err(invalid("runs must be at least 1"));
    }
    (0..cfg.runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = run_rng(cfg.seed, r);
            simulate(cfg.m, cfg.k, cfg.start, &mut rng, caps).map(|p| p.total())
        })
        .collect()
}

pub fn monte_carlo(cfg: &MonteCarloConfig, caps: &Caps) -> Result<MonteCarloStats> {
    let totals = monte_carlo_totals(cfg, caps)?;
    summarize(cfg, &totals)
}

/// Aggregate per-run totals into [`MonteCarloStats`].
pub fn summarize(cfg: &MonteCarloConfig, totals: &[u64]) -> Result<MonteCarloStats> {
    let n = totals.len() as f64;
    let mean = totals.iter().map(|&x| x as f64).sum::<f64>() / n;
    let variance = (totals.len() > 1).then(|| {
        totals
            .iter()
            .map(|&x| (x as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    });
    let expected_mean = Probability::to_f64(&expected_cost(cfg.m, cfg.k, cfg.start)?);
    let normalizer = spectral(cfg.m)?.n_alpha(cfg.k);
    let empirical_tail = cfg
        .tail_grid
        .iter()
        .map(|&t| {
            let hits = totals
                .iter()
                .filter(|&&x| (x as f64 - expected_mean) / normalizer > t)
                .count();
            TailPoint {
                t,
                frequency: hits as f64 / n,
            }
        })
        .collect();
    Ok(MonteCarloStats {
        m: cfg.m,
        k: cfg.k,
        start: cfg.start,
        runs: cfg.runs,
        seed: cfg.seed,
        mean,
        variance,
        expected_mean,
        normalizer,
        empirical_tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn binary_offspring_laws() {
        let one = offspring_law::<BigRational>(RootBit::One, 2);
        assert_eq!(
            one,
            vec![
                (Population { type0: 0, type1: 2 }, q(1, 4)),
                (Population { type0: 1, type1: 2 }, q(1, 2)),
                (Population { type0: 2, type1: 2 }, q(1, 4)),
            ]
        );
        let mut zero = offspring_law::<BigRational>(RootBit::Zero, 2);
        zero.sort();
        assert_eq!(
            zero,
            vec![
                (Population { type0: 2, type1: 0 }, q(1, 2)),
                (Population { type0: 2, type1: 1 }, q(1, 4)),
                (Population { type0: 3, type1: 1 }, q(1, 4)),
            ]
        );
    }

    #[test]
    fn ternary_type_one_law() {
        let law = offspring_law::<BigRational>(RootBit::One, 3);
        assert!(law.iter().all(|(p, _)| p.type1 == 3));
        assert_eq!(law.len(), 7);
        let mean: BigRational = law.iter().map(|(p, w)| w * q(p.type0 as i64, 1)).sum();
        assert_eq!(mean, q(3, 1));
    }

    #[test]
    fn zero_generations() {
        let mut rng = seeded_rng(0);
        let p = simulate(2, 0, RootBit::One, &mut rng, &Caps::default()).unwrap();
        assert_eq!(p, Population { type0: 0, type1: 1 });
    }

    #[test]
    fn population_guard() {
        let caps = Caps {
            max_population: 10,
            ..Caps::default()
        };
        let mut rng = seeded_rng(0);
        assert!(simulate(2, 6, RootBit::One, &mut rng, &caps).is_err());
    }

    #[test]
    fn single_run_has_no_variance() {
        let cfg = MonteCarloConfig::new(2, 3, RootBit::One, 1, 42);
        let stats = monte_carlo(&cfg, &Caps::default()).unwrap();
        let totals = monte_carlo_totals(&cfg, &Caps::default()).unwrap();
        assert_eq!(stats.mean, totals[0] as f64);
        assert_eq!(stats.variance, None);
        assert!(MonteCarloConfig::new(2, 3, RootBit::One, 0, 1).runs == 0);
        assert!(monte_carlo(
            &MonteCarloConfig::new(2, 3, RootBit::One, 0, 1),
            &Caps::default()
        )
        .is_err());
    }

    #[test]
    fn reproducible() {
        let cfg = MonteCarloConfig::new(2, 4, RootBit::One, 2000, 9);
        let a = monte_carlo(&cfg, &Caps::default()).unwrap();
        let b = monte_carlo(&cfg, &Caps::default()).unwrap();
        assert_eq!(a, b);
        let serial: Vec<u64> = (0..cfg.runs)
            .map(|r| {
                simulate(2, 4, RootBit::One, &mut run_rng(9, r), &Caps::default())
                    .unwrap()
                    .total()
            })
            .collect();
        assert_eq!(serial, monte_carlo_totals(&cfg, &Caps::default()).unwrap());
    }
}
