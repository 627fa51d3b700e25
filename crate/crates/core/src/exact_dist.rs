//! Exact cost laws.
//!
//! - [`exact_cost_pmf`]: law of the cost on an arbitrary input, bottom-up
//!   over the tree.
//! - [`z_recursion_pmf`]: joint law of the costs on the two worst inputs,
//!   from the coupled coin recursion.
//! - [`worst_marginals`]: the two marginals alone, from the offspring laws.
//! - [`verify_worst_case`]: exhaustive stochastic-dominance scan.
//! - [`convergence_diagnostics`]: distances between successive normalized laws.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::spectral;
use crate::branching::offspring_law;
use crate::error::{check_cap, invalid, Result};
use crate::pmf::{distances, dominates, BivariatePmf, CostPmf, Probability};
use crate::tree::{leaf_count, root_value, Gate, LeafVector, TreeShape};
use crate::worst_case::{worst_input_with_caps, RootBit};
use crate::Caps;

/// Value and cost law of a subtree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeLaw {
    pub value: bool,
    pub cost: CostPmf,
}

/// Memoizing evaluator of subtree cost laws.
///
/// Laws are interned; a gate's law depends only on the multiset of its
/// children's laws, since children are visited in uniformly random order.
#[derive(Debug, Default)]
pub struct PmfEngine {
    laws: Vec<NodeLaw>,
    ids: HashMap<NodeLaw, usize>,
    gates: HashMap<(Gate, Vec<usize>), usize>,
}

impl PmfEngine {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, law: NodeLaw) -> usize {
        if let Some(&id) = self.ids.get(&law) {
            return id;
        }
        let id = self.laws.len();
        self.ids.insert(law.clone(), id);
        self.laws.push(law);
        id
    }

    pub fn law(&self, id: usize) -> &NodeLaw {
        &self.laws[id]
    }

    pub fn leaf(&mut self, value: bool) -> usize {
        self.intern(NodeLaw {
            value,
            cost: CostPmf::point(1),
        })
    }

    /// Law of a gate over the given children.
    pub fn gate(&mut self, gate: Gate, children: &[usize]) -> usize {
        let mut key = children.to_vec();
        key.sort_unstable();
        if let Some(&id) = self.gates.get(&(gate, key.clone())) {
            return id;
        }
        let kids: Vec<&NodeLaw> = key.iter().map(|&c| &self.laws[c]).collect();
        let law = combine(gate, &kids);
        let id = self.intern(law);
        self.gates.insert((gate, key), id);
        id
    }

    /// Law of the root of `v`.
    pub fn evaluate(&mut self, v: &LeafVector) -> usize {
        let shape = v.shape();
        let m = shape.arity();
        let (zero, one) = (self.leaf(false), self.leaf(true));
        let mut level: Vec<usize> = v
            .bits()
            .iter()
            .map(|&b| if b { one } else { zero })
            .collect();
        let mut depth = shape.depth();
        while depth > 0 {
            depth -= 1;
            let gate = Gate::at_depth(depth);
            level = level.chunks(m).map(|kids| self.gate(gate, kids)).collect();
        }
        level[0]
    }
}

fn factorial(n: usize) -> BigRational {
    (1..=n as u64).fold(BigRational::one(), |acc, i| {
        acc * BigRational::from_integer(i.into())
    })
}

/// Children are drawn in random order; reading stops at the first child
/// holding the gate's determining value. If `d` of the `m` children are
/// determining, exactly `j` non-determining ones precede the first
/// determining one with probability `r!/(r-j)! · d · (m-1-j)! / m!`
/// (`r = m - d`), and given `j` they form a uniform `j`-subset.
fn combine(gate: Gate, kids: &[&NodeLaw]) -> NodeLaw {
    let m = kids.len();
    let stop = gate.determining();
    let (det, rest): (Vec<&NodeLaw>, Vec<&NodeLaw>) = kids.iter().partition(|k| k.value == stop);
    if det.is_empty() {
        let cost = rest
            .iter()
            .fold(CostPmf::point(0), |acc, k| acc.convolve(&k.cost));
        return NodeLaw { value: !stop, cost };
    }
    // esym[j] = Σ over j-subsets S of rest of the convolution over S.
    let mut esym: Vec<CostPmf> = vec![CostPmf::point(0)];
    for k in &rest {
        esym.push(CostPmf::zero_measure());
        for j in (1..esym.len()).rev() {
            let add = esym[j - 1].convolve(&k.cost);
            esym[j].accumulate(&add);
        }
    }
    let mut det_sum = CostPmf::zero_measure();
    for k in &det {
        det_sum.accumulate(&k.cost);
    }
    let m_fact = factorial(m);
    let mut cost = CostPmf::zero_measure();
    for (j, e) in esym.iter().enumerate() {
        // Per-subset weight j!(m-1-j)!/m!; the d choices of the stopping
        // child are folded into det_sum.
        let w = factorial(j) * factorial(m - 1 - j) / &m_fact;
        cost.accumulate(&e.convolve(&det_sum).scale(&w));
    }
    NodeLaw { value: stop, cost }
}

/// Exact law of the number of leaves read on input `v`.
pub fn exact_cost_pmf(v: &LeafVector) -> Result<CostPmf> {
    exact_cost_pmf_with_caps(v, &Caps::default())
}

pub fn exact_cost_pmf_with_caps(v: &LeafVector, caps: &Caps) -> Result<CostPmf> {
    check_cap(
        "max-pmf-support",
        v.shape().leaf_count() as u128,
        caps.max_pmf_support as u128,
    )?;
    let mut engine = PmfEngine::new();
    let id = engine.evaluate(v);
    Ok(engine.law(id).cost.clone())
}

/// One step of the coupled recursion: the level-`k` joint law from level `k-1`.
///
/// Conditioned on `U_0 = u`, the pair is a sum of independent pieces:
/// `m` plain copies, `u` swapped copies `(Z_1, Z_0)`, `u` full OR groups
/// contributing `(Z_0, 0)` for the `U_r` zeros read before the one is found and
/// `(0, Z_0)` for the `m - 1 - U_r` others, and `m - 1 - u` unread groups
/// contributing only `(0, Z_0)` for the `m - 1 - U_r` zeros.
fn z_step<P: Probability>(m: usize, prev: &BivariatePmf<P>) -> BivariatePmf<P> {
    let w = P::ratio(1, m as u64);
    let to_first = prev.map(|x, _| (x, 0));
    let to_second = prev.map(|x, _| (0, x));
    let swapped = prev.map(|x, y| (y, x));
    let first_pows: Vec<_> = powers(&to_first, m - 1);
    let second_pows: Vec<_> = powers(&to_second, m - 1);

    let mut group_read = BivariatePmf::zero_measure();
    let mut group_unread = BivariatePmf::zero_measure();
    for u in 0..m {
        group_read.accumulate(&first_pows[u].convolve(&second_pows[m - 1 - u]).scale(&w));
        group_unread.accumulate(&second_pows[m - 1 - u].scale(&w));
    }
    let read_pows = powers(&group_read, m - 1);
    let unread_pows = powers(&group_unread, m - 1);
    let swap_pows = powers(&swapped, m - 1);

    let mut mix = BivariatePmf::zero_measure();
    for u in 0..m {
        let piece = swap_pows[u]
            .convolve(&read_pows[u])
            .convolve(&unread_pows[m - 1 - u]);
        mix.accumulate(&piece.scale(&w));
    }
    prev.power(m).convolve(&mix)
}

fn powers<P: Probability>(base: &BivariatePmf<P>, max: usize) -> Vec<BivariatePmf<P>> {
    let mut out = vec![BivariatePmf::point(0, 0)];
    for i in 0..max {
        let next = out[i].convolve(base);
        out.push(next);
    }
    out
}

/// Exact joint law of `(Z_{n,0}, Z_{n,1})` at half-height `k`.
///
/// The marginals are the cost laws on the worst inputs with root 0 and 1.
pub fn z_recursion_pmf(m: usize, k: u32, caps: &Caps) -> Result<BivariatePmf> {
    z_recursion_generic(m, k, caps)
}

pub fn z_recursion_generic<P: Probability>(
    m: usize,
    k: u32,
    caps: &Caps,
) -> Result<BivariatePmf<P>> {
    if m < 2 {
        return Err(invalid(format!("arity must be at least 2, got {m}")));
    }
    let n = leaf_count(m, k).unwrap_or(u128::MAX);
    // Each coordinate lies in [1, n].
    check_cap(
        "max-pmf-support",
        n.saturating_mul(n),
        caps.max_pmf_support as u128,
    )?;
    let mut law = BivariatePmf::point(1, 1);
    for _ in 0..k {
        law = z_step(m, &law);
    }
    Ok(law)
}

/// Cost laws on the worst inputs `[root 0, root 1]` at half-height `k`, by
/// composing the offspring laws generation by generation.
pub fn worst_marginals<P: Probability>(m: usize, k: u32, caps: &Caps) -> Result<[CostPmf<P>; 2]> {
    if m < 2 {
        return Err(invalid(format!("arity must be at least 2, got {m}")));
    }
    let n = leaf_count(m, k).unwrap_or(u128::MAX);
    check_cap("max-pmf-support", n, caps.max_pmf_support as u128)?;
    let laws = [
        offspring_law::<P>(RootBit::Zero, m),
        offspring_law::<P>(RootBit::One, m),
    ];
    let max_a = laws
        .iter()
        .flatten()
        .map(|(p, _)| p.type0)
        .max()
        .unwrap_or(0) as usize;
    let max_b = laws
        .iter()
        .flatten()
        .map(|(p, _)| p.type1)
        .max()
        .unwrap_or(0) as usize;
    let mut cur: [CostPmf<P>; 2] = [CostPmf::point(1), CostPmf::point(1)];
    for _ in 0..k {
        let p0_pows = pmf_powers(&cur[0], max_a);
        let p1_pows = pmf_powers(&cur[1], max_b);
        let next = laws.clone().map(|law| {
            // Group by type-1 count so each P1 power is convolved once.
            let mut by_b: Vec<CostPmf<P>> = vec![CostPmf::zero_measure(); max_b + 1];
            for (pop, w) in &law {
                by_b[pop.type1 as usize].accumulate(&p0_pows[pop.type0 as usize].scale(w));
            }
            let mut out = CostPmf::zero_measure();
            for (b, part) in by_b.iter().enumerate() {
                if part.support_len() > 0 {
                    out.accumulate(&p1_pows[b].convolve(part));
                }
            }
            out
        });
        cur = next;
    }
    Ok(cur)
}

fn pmf_powers<P: Probability>(base: &CostPmf<P>, max: usize) -> Vec<CostPmf<P>> {
    let mut out = vec![CostPmf::point(0)];
    for i in 0..max {
        let next = out[i].convolve(base);
        out.push(next);
    }
    out
}

/// An input not dominated by the corresponding worst input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub input: String,
    /// Which worst input failed to dominate it.
    pub against: RootBit,
}

/// Outcome of an exhaustive dominance scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorstCaseReport {
    pub m: usize,
    pub k: u32,
    pub inputs_scanned: u64,
    pub zero_root_inputs: u64,
    pub worst_one: String,
    pub worst_zero: String,
    pub violations: Vec<Violation>,
    /// Inputs whose law equals that of the root-1 worst input.
    pub maximal_inputs: Vec<String>,
    /// Root-0 inputs whose law equals that of the root-0 worst input.
    pub maximal_zero_inputs: Vec<String>,
}

impl WorstCaseReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Default)]
struct ScanChunk {
    zero_root: u64,
    violations: Vec<Violation>,
    maximal: Vec<String>,
    maximal_zero: Vec<String>,
}

/// Check `C(v) ⪯ C(v★)` for all `2^n` inputs and `C(v) ⪯ C(v⋆)` for all
/// inputs with root value 0. Input `i` sets leaf `j` to bit `j` of `i`.
pub fn verify_worst_case(m: usize, k: u32, caps: &Caps) -> Result<WorstCaseReport> {
    let shape = TreeShape::with_caps(m, k, caps)?;
    let n = shape.leaf_count();
    check_cap("max-exhaustive-n", n as u128, caps.max_exhaustive_n as u128)?;
    if n >= 64 {
        return Err(invalid("exhaustive scan needs fewer than 64 leaves"));
    }
    let star = worst_input_with_caps(m, k, RootBit::One, caps)?;
    let lower_star = worst_input_with_caps(m, k, RootBit::Zero, caps)?;
    let mut engine = PmfEngine::new();
    let star_id = engine.evaluate(&star);
    let lower_id = engine.evaluate(&lower_star);
    let star_law = engine.law(star_id).cost.clone();
    let lower_law = engine.law(lower_id).cost.clone();

    let total: u64 = 1u64 << n;
    const CHUNK: u64 = 4096;
    let chunks: Vec<ScanChunk> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut engine = PmfEngine::new();
            let mut out = ScanChunk::default();
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let bits: Vec<bool> = (0..n).map(|j| (idx >> j) & 1 == 1).collect();
                let v = LeafVector::new(shape, bits).expect("shape matches");
                let id = engine.evaluate(&v);
                let law = engine.law(id).cost.clone();
                let label = v.to_bit_string();
                if !dominates(&law, &star_law) {
                    out.violations.push(Violation {
                        input: label.clone(),
                        against: RootBit::One,
                    });
                }
                if law == star_law {
                    out.maximal.push(label.clone());
                }
                if !root_value(&v) {
                    out.zero_root += 1;
                    if !dominates(&law, &lower_law) {
                        out.violations.push(Violation {
                            input: label.clone(),
                            against: RootBit::Zero,
                        });
                    }
                    if law == lower_law {
                        out.maximal_zero.push(label);
                    }
                }
            }
            out
        })
        .collect();

    let mut report = WorstCaseReport {
        m,
        k,
        inputs_scanned: total,
        zero_root_inputs: 0,
        worst_one: star.to_bit_string(),
        worst_zero: lower_star.to_bit_string(),
        violations: Vec::new(),
        maximal_inputs: Vec::new(),
        maximal_zero_inputs: Vec::new(),
    };
    for c in chunks {
        report.zero_root_inputs += c.zero_root;
        report.violations.extend(c.violations);
        report.maximal_inputs.extend(c.maximal);
        report.maximal_zero_inputs.extend(c.maximal_zero);
    }
    Ok(report)
}

/// Distances between the laws of `C(v★)/n^α` at levels `k-1` and `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStep {
    pub k: u32,
    /// `E C(v★) / λ1^k`.
    pub rescaled_mean: f64,
    pub kolmogorov: f64,
    pub wasserstein: f64,
}

/// Diagnostics for `k = 1..=k_max`, computed in floating point.
pub fn convergence_diagnostics(m: usize, k_max: u32, caps: &Caps) -> Result<Vec<ConvergenceStep>> {
    let n = leaf_count(m, k_max).unwrap_or(u128::MAX);
    check_cap("max-pmf-support", n, caps.max_pmf_support as u128)?;
    let spec = spectral(m)?;
    let rescale = |law: &CostPmf<f64>, k: u32| -> Vec<(f64, f64)> {
        let norm = spec.n_alpha(k);
        law.entries()
            .iter()
            .map(|(&c, &p)| (c as f64 / norm, p))
            .collect()
    };
    let mut prev = rescale(&CostPmf::point(1), 0);
    let mut law: [CostPmf<f64>; 2] = [CostPmf::point(1), CostPmf::point(1)];
    let mut out = Vec::with_capacity(k_max as usize);
    let laws = [
        offspring_law::<f64>(RootBit::Zero, m),
        offspring_law::<f64>(RootBit::One, m),
    ];
    for k in 1..=k_max {
        law = step_marginals(&law, &laws);
        let cur = rescale(&law[1], k);
        let (ks, w1) = distances(&prev, &cur);
        out.push(ConvergenceStep {
            k,
            rescaled_mean: law[1].mean() / spec.n_alpha(k),
            kolmogorov: ks,
            wasserstein: w1,
        });
        prev = cur;
    }
    Ok(out)
}

fn step_marginals(
    cur: &[CostPmf<f64>; 2],
    laws: &[Vec<(crate::branching::Population, f64)>; 2],
) -> [CostPmf<f64>; 2] {
    let max_a = laws
        .iter()
        .flatten()
        .map(|(p, _)| p.type0)
        .max()
        .unwrap_or(0) as usize;
    let max_b = laws
        .iter()
        .flatten()
        .map(|(p, _)| p.type1)
        .max()
        .unwrap_or(0) as usize;
    let p0 = pmf_powers(&cur[0], max_a);
    let p1 = pmf_powers(&cur[1], max_b);
    laws.clone().map(|law| {
        let mut by_b: Vec<CostPmf<f64>> = vec![CostPmf::zero_measure(); max_b + 1];
        for (pop, w) in &law {
            by_b[pop.type1 as usize].accumulate(&p0[pop.type0 as usize].scale(w));
        }
        let mut out = CostPmf::zero_measure();
        for (b, part) in by_b.iter().enumerate() {
            if part.support_len() > 0 {
                out.accumulate(&p1[b].convolve(part));
            }
        }
        out
    })
}

/// Whether every probability in `law` is nonnegative and they sum to one.
pub fn is_normalized(law: &CostPmf) -> bool {
    law.total() == BigRational::one() && law.entries().values().all(|p| *p >= BigRational::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::expected_cost;
    use crate::worst_case::worst_input;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn pmf(pairs: &[(u64, i64, i64)]) -> CostPmf {
        CostPmf::from_pairs(pairs.iter().map(|&(c, n, d)| (c, q(n, d))))
    }

    fn law_of(m: usize, s: &str) -> CostPmf {
        exact_cost_pmf(&LeafVector::parse(m, s, &Caps::default()).unwrap()).unwrap()
    }

    #[test]
    fn small_laws() {
        assert_eq!(law_of(2, "0101"), pmf(&[(2, 1, 4), (3, 1, 2), (4, 1, 4)]));
        assert_eq!(law_of(2, "0001"), pmf(&[(2, 1, 2), (3, 1, 4), (4, 1, 4)]));
        assert_eq!(law_of(2, "0000"), CostPmf::point(2));
        assert_eq!(law_of(2, "1"), CostPmf::point(1));
    }

    #[test]
    fn z_recursion_first_level() {
        let z = z_recursion_pmf(2, 0, &Caps::default()).unwrap();
        assert_eq!(z, BivariatePmf::point(1, 1));
        let z = z_recursion_pmf(2, 1, &Caps::default()).unwrap();
        assert_eq!(z.marginal(1), pmf(&[(2, 1, 4), (3, 1, 2), (4, 1, 4)]));
        assert_eq!(z.marginal(0), pmf(&[(2, 1, 2), (3, 1, 4), (4, 1, 4)]));
        assert_eq!(z.total(), q(1, 1));
    }

    #[test]
    fn marginal_routes_agree() {
        for (m, k) in [(2usize, 3u32), (3, 2)] {
            let z = z_recursion_pmf(m, k, &Caps::default()).unwrap();
            let marg = worst_marginals::<BigRational>(m, k, &Caps::default()).unwrap();
            assert_eq!(z.marginal(0), marg[0]);
            assert_eq!(z.marginal(1), marg[1]);
            assert_eq!(marg[1].mean(), expected_cost(m, k, RootBit::One).unwrap());
        }
    }

    #[test]
    fn worst_input_law_matches_marginal() {
        let v = worst_input(3, 2, RootBit::Zero).unwrap();
        let marg = worst_marginals::<BigRational>(3, 2, &Caps::default()).unwrap();
        assert_eq!(exact_cost_pmf(&v).unwrap(), marg[0]);
    }

    #[test]
    fn scan_small() {
        let r = verify_worst_case(2, 1, &Caps::default()).unwrap();
        assert!(r.passed());
        assert_eq!(r.inputs_scanned, 16);
        assert!(r.maximal_inputs.contains(&"0101".to_string()));
        assert!(r.maximal_zero_inputs.contains(&"0001".to_string()));
        let caps = Caps {
            max_exhaustive_n: 8,
            ..Caps::default()
        };
        assert!(verify_worst_case(2, 2, &caps).is_err());
    }

    #[test]
    fn diagnostics_are_nonnegative() {
        let d = convergence_diagnostics(2, 4, &Caps::default()).unwrap();
        assert_eq!(d.len(), 4);
        assert!(d
            .iter()
            .all(|s| s.kolmogorov >= 0.0 && s.wasserstein >= 0.0));
    }
}
