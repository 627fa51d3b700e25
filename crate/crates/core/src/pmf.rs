//! Probability mass functions on nonnegative integers and integer pairs.
//!
//! Laws are generic over the weight type: exact [`BigRational`] by default,
//! `f64` for large diagnostics.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{AddAssign, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weight type of a probability mass function.
pub trait Probability:
    Clone + PartialOrd + Zero + One + AddAssign + Mul<Output = Self> + fmt::Debug
{
    fn ratio(num: u64, den: u64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Probability for BigRational {
    fn ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Probability for f64 {
    fn ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Law of a nonnegative integer cost.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CostPmf<P = BigRational> {
    entries: BTreeMap<u64, P>,
}

pub type FloatPmf = CostPmf<f64>;

impl<P: Probability> CostPmf<P> {
    pub fn point(cost: u64) -> Self {
        CostPmf {
            entries: BTreeMap::from([(cost, P::one())]),
        }
    }

    /// Build from `(cost, probability)` pairs, merging duplicates and
    /// dropping zeros.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, P)>) -> Self {
        let mut entries: BTreeMap<u64, P> = BTreeMap::new();
        for (c, p) in pairs {
            *entries.entry(c).or_insert_with(P::zero) += p;
        }
        entries.retain(|_, p| !p.is_zero());
        CostPmf { entries }
    }

    pub fn entries(&self) -> &BTreeMap<u64, P> {
        &self.entries
    }

    pub fn prob(&self, cost: u64) -> P {
        self.entries.get(&cost).cloned().unwrap_or_else(P::zero)
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn min_cost(&self) -> Option<u64> {
        self.entries.keys().next().copied()
    }

    pub fn max_cost(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    pub fn total(&self) -> P {
        let mut t = P::zero();
        for p in self.entries.values() {
            t += p.clone();
        }
        t
    }

    pub fn mean(&self) -> P {
        let mut t = P::zero();
        for (&c, p) in &self.entries {
            t += P::ratio(c, 1) * p.clone();
        }
        t
    }

    pub fn second_moment(&self) -> P {
        let mut t = P::zero();
        for (&c, p) in &self.entries {
            t += P::ratio(c * c, 1) * p.clone();
        }
        t
    }

    /// Law of the sum of two independent costs.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut entries: BTreeMap<u64, P> = BTreeMap::new();
        for (&a, pa) in &self.entries {
            for (&b, pb) in &other.entries {
                *entries.entry(a + b).or_insert_with(P::zero) += pa.clone() * pb.clone();
            }
        }
        CostPmf { entries }
    }

    /// `j`-fold self-convolution; `j = 0` is the point mass at 0.
    pub fn power(&self, j: usize) -> Self {
        let mut acc = Self::point(0);
        for _ in 0..j {
            acc = acc.convolve(self);
        }
        acc
    }

    pub fn scale(&self, w: &P) -> Self {
        CostPmf {
            entries: self
                .entries
                .iter()
                .map(|(&c, p)| (c, p.clone() * w.clone()))
                .collect(),
        }
    }

    /// Add `other` (unnormalized mixture accumulation).
    pub fn accumulate(&mut self, other: &Self) {
        for (&c, p) in &other.entries {
            *self.entries.entry(c).or_insert_with(P::zero) += p.clone();
        }
    }

    pub fn zero_measure() -> Self {
        CostPmf {
            entries: BTreeMap::new(),
        }
    }

    /// CDF values `(x, F(x))` at each support point.
    pub fn cdf(&self) -> Vec<(u64, P)> {
        let mut acc = P::zero();
        self.entries
            .iter()
            .map(|(&c, p)| {
                acc += p.clone();
                (c, acc.clone())
            })
            .collect()
    }

    /// CDF evaluated at an arbitrary point.
    pub fn cdf_at(&self, x: u64) -> P {
        let mut acc = P::zero();
        for p in self.entries.range(..=x).map(|(_, p)| p) {
            acc += p.clone();
        }
        acc
    }

    pub fn to_float(&self) -> FloatPmf {
        CostPmf {
            entries: self.entries.iter().map(|(&c, p)| (c, p.to_f64())).collect(),
        }
    }
}

impl CostPmf<BigRational> {
    pub fn variance(&self) -> BigRational {
        let m = self.mean();
        self.second_moment() - m.clone() * m
    }
}

impl FloatPmf {
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.second_moment() - m * m
    }
}

/// `a ⪯ b` in the usual stochastic order: `F_a(x) >= F_b(x)` for every `x`.
///
/// Both CDFs are step functions, so comparing on the union of supports is
/// enough.
pub fn dominates<P: Probability>(a: &CostPmf<P>, b: &CostPmf<P>) -> bool {
    let mut points: Vec<u64> = a.entries.keys().chain(b.entries.keys()).copied().collect();
    points.sort_unstable();
    points.dedup();
    let (mut fa, mut fb) = (P::zero(), P::zero());
    for x in points {
        if let Some(p) = a.entries.get(&x) {
            fa += p.clone();
        }
        if let Some(p) = b.entries.get(&x) {
            fb += p.clone();
        }
        if fa < fb {
            return false;
        }
    }
    true
}

/// Kolmogorov and first Wasserstein distance between two laws on the real
/// line, each given as `(location, weight)` atoms sorted by location.
pub fn distances(a: &[(f64, f64)], b: &[(f64, f64)]) -> (f64, f64) {
    let (mut i, mut j) = (0usize, 0usize);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut ks = 0.0f64;
    let mut w1 = 0.0f64;
    let mut last: Option<f64> = None;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&(xa, _)), Some(&(xb, _))) => xa.min(xb),
            (Some(&(xa, _)), None) => xa,
            (None, Some(&(xb, _))) => xb,
            (None, None) => unreachable!(),
        };
        if let Some(prev) = last {
            w1 += (fa - fb).abs() * (x - prev);
        }
        while i < a.len() && a[i].0 == x {
            fa += a[i].1;
            i += 1;
        }
        while j < b.len() && b[j].0 == x {
            fb += b[j].1;
            j += 1;
        }
        ks = ks.max((fa - fb).abs());
        last = Some(x);
    }
    (ks, w1)
}

/// Joint law of an integer pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivariatePmf<P = BigRational> {
    entries: BTreeMap<(u64, u64), P>,
}

impl<P: Probability> BivariatePmf<P> {
    pub fn point(x: u64, y: u64) -> Self {
        BivariatePmf {
            entries: BTreeMap::from([((x, y), P::one())]),
        }
    }

    pub fn zero_measure() -> Self {
        BivariatePmf {
            entries: BTreeMap::new(),
        }
    }

    pub fn entries(&self) -> &BTreeMap<(u64, u64), P> {
        &self.entries
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn total(&self) -> P {
        let mut t = P::zero();
        for p in self.entries.values() {
            t += p.clone();
        }
        t
    }

    pub fn convolve(&self, other: &Self) -> Self {
        let mut entries: BTreeMap<(u64, u64), P> = BTreeMap::new();
        for (&(a0, a1), pa) in &self.entries {
            for (&(b0, b1), pb) in &other.entries {
                *entries.entry((a0 + b0, a1 + b1)).or_insert_with(P::zero) +=
                    pa.clone() * pb.clone();
            }
        }
        BivariatePmf { entries }
    }

    pub fn power(&self, j: usize) -> Self {
        let mut acc = Self::point(0, 0);
        for _ in 0..j {
            acc = acc.convolve(self);
        }
        acc
    }

    /// Law of `f(Z)` for a coordinate map `f`.
    pub fn map(&self, f: impl Fn(u64, u64) -> (u64, u64)) -> Self {
        let mut entries: BTreeMap<(u64, u64), P> = BTreeMap::new();
        for (&(x, y), p) in &self.entries {
            *entries.entry(f(x, y)).or_insert_with(P::zero) += p.clone();
        }
        BivariatePmf { entries }
    }

    pub fn scale(&self, w: &P) -> Self {
        BivariatePmf {
            entries: self
                .entries
                .iter()
                .map(|(&k, p)| (k, p.clone() * w.clone()))
                .collect(),
        }
    }

    pub fn accumulate(&mut self, other: &Self) {
        for (&k, p) in &other.entries {
            *self.entries.entry(k).or_insert_with(P::zero) += p.clone();
        }
    }

    /// Marginal of coordinate `coord` (0 or 1).
    pub fn marginal(&self, coord: usize) -> CostPmf<P> {
        CostPmf::from_pairs(
            self.entries
                .iter()
                .map(|(&(x, y), p)| (if coord == 0 { x } else { y }, p.clone())),
        )
    }

    /// `E[Z_i Z_j]` for the coordinate pair.
    pub fn mixed_moment(&self, i: usize, j: usize) -> P {
        let mut t = P::zero();
        for (&(x, y), p) in &self.entries {
            let c = [x, y];
            t += P::ratio(c[i] * c[j], 1) * p.clone();
        }
        t
    }
}

// Serialized as {"cost": "p/q"}: keys are decimal strings, probabilities are
// exact rational strings.

impl Serialize for CostPmf<BigRational> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.entries.len()))?;
        for (c, p) in &self.entries {
            map.serialize_entry(&c.to_string(), &p.to_string())?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for CostPmf<BigRational> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct PmfVisitor;
        impl<'de> Visitor<'de> for PmfVisitor {
            type Value = CostPmf<BigRational>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from integer cost to rational probability string")
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut access: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut pairs = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, String>()? {
                    let cost: u64 = k.parse().map_err(de::Error::custom)?;
                    let p = parse_rational(&v).map_err(de::Error::custom)?;
                    pairs.push((cost, p));
                }
                Ok(CostPmf::from_pairs(pairs))
            }
        }
        d.deserialize_map(PmfVisitor)
    }
}

/// Parse `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(BigRational::new(parse_int(n)?, d))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}
