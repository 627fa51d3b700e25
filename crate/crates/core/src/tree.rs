//! Complete m-ary AND/OR trees and their evaluation.
//!
//! A tree of half-height `k` has depth `2k`; internal nodes at even depth are
//! AND gates, those at odd depth are OR gates. Trees are implicit: the node
//! at depth `d` with index `i` (left to right) has children `i*m .. i*m + m`
//! at depth `d + 1`, and leaf `i` is `bits[i]`.

use serde::{Deserialize, Serialize};

use crate::error::{check_cap, invalid, Error, Result};
use crate::rng::UniformSource;
use crate::Caps;

/// Shape of a complete m-ary tree of height `2 * half_height`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeShape {
    arity: usize,
    half_height: u32,
    leaf_count: usize,
}

/// Gate type of an internal node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    And,
    Or,
}

impl Gate {
    pub fn at_depth(depth: u32) -> Gate {
        if depth.is_multiple_of(2) {
            Gate::And
        } else {
            Gate::Or
        }
    }

    /// The child value that settles this gate on its own.
    pub fn determining(self) -> bool {
        matches!(self, Gate::Or)
    }
}

/// `m^{2k}`, or `None` on overflow.
pub fn leaf_count(arity: usize, half_height: u32) -> Option<u128> {
    (arity as u128).checked_pow(half_height.checked_mul(2)?)
}

impl TreeShape {
    /// Shape with the default leaf cap.
    pub fn new(arity: usize, half_height: u32) -> Result<Self> {
        Self::with_caps(arity, half_height, &Caps::default())
    }

    pub fn with_caps(arity: usize, half_height: u32, caps: &Caps) -> Result<Self> {
        if arity < 2 {
            return Err(invalid(format!("arity must be at least 2, got {arity}")));
        }
        let n = leaf_count(arity, half_height).ok_or(Error::CapExceeded {
            cap: "max-leaves",
            requested: u128::MAX,
            limit: caps.max_leaves as u128,
        })?;
        check_cap("max-leaves", n, caps.max_leaves as u128)?;
        Ok(TreeShape {
            arity,
            half_height,
            leaf_count: n as usize,
        })
    }

    /// Infer the half-height from a leaf count; fails unless `n = m^{2k}`.
    pub fn from_leaf_count(arity: usize, n: usize, caps: &Caps) -> Result<Self> {
        if arity < 2 {
            return Err(invalid(format!("arity must be at least 2, got {arity}")));
        }
        let mut k = 0u32;
        let mut size = 1usize;
        while size < n {
            size = size
                .checked_mul(arity * arity)
                .ok_or_else(|| invalid("leaf count overflow"))?;
            k += 1;
        }
        if size != n {
            return Err(invalid(format!(
                "{n} leaves is not an even power of the arity {arity}"
            )));
        }
        Self::with_caps(arity, k, caps)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn half_height(&self) -> u32 {
        self.half_height
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    pub fn depth(&self) -> u32 {
        2 * self.half_height
    }

    /// Number of leaves below a node at `depth`.
    pub fn subtree_leaves(&self, depth: u32) -> usize {
        self.arity.pow(self.depth() - depth)
    }
}

/// A 0/1 labelling of the leaves of a [`TreeShape`], in left-to-right order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LeafVector {
    shape: TreeShape,
    bits: Vec<bool>,
}

impl LeafVector {
    pub fn new(shape: TreeShape, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != shape.leaf_count() {
            return Err(invalid(format!(
                "expected {} leaves, got {}",
                shape.leaf_count(),
                bits.len()
            )));
        }
        Ok(LeafVector { shape, bits })
    }

    /// Build from bits, inferring the half-height from the length.
    pub fn from_bits(arity: usize, bits: Vec<bool>, caps: &Caps) -> Result<Self> {
        let shape = TreeShape::from_leaf_count(arity, bits.len(), caps)?;
        Ok(LeafVector { shape, bits })
    }

    /// Parse a string of `0`/`1` characters.
    pub fn parse(arity: usize, s: &str, caps: &Caps) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!(
                    "unexpected character {other:?} in leaf string"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(arity, bits, caps)
    }

    pub fn shape(&self) -> &TreeShape {
        &self.shape
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    pub fn to_bit_string(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }
}

/// Result of one randomized evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub root_bit: bool,
    pub leaves_read: usize,
    /// Sorted indices of the leaves read, when recording was requested.
    pub read_set: Option<Vec<usize>>,
}

/// Deterministic value of the root.
pub fn root_value(v: &LeafVector) -> bool {
    let m = v.shape.arity();
    let mut level: Vec<bool> = v.bits.clone();
    let mut depth = v.shape.depth();
    while depth > 0 {
        depth -= 1;
        let gate = Gate::at_depth(depth);
        level = level
            .chunks(m)
            .map(|kids| match gate {
                Gate::And => kids.iter().all(|&b| b),
                Gate::Or => kids.iter().any(|&b| b),
            })
            .collect();
    }
    level[0]
}

/// Run the randomized evaluator once.
///
/// Every internal node draws its children in uniformly random order without
/// replacement and stops at the first child whose value settles the gate.
pub fn snir_eval<S: UniformSource + ?Sized>(v: &LeafVector, rng: &mut S) -> EvalOutcome {
    snir_eval_with(v, rng, false)
}

/// As [`snir_eval`], optionally recording the set of leaves read.
pub fn snir_eval_with<S: UniformSource + ?Sized>(
    v: &LeafVector,
    rng: &mut S,
    record: bool,
) -> EvalOutcome {
    let mut walker = Walker {
        bits: &v.bits,
        arity: v.shape.arity(),
        leaf_depth: v.shape.depth(),
        count: 0,
        read: record.then(Vec::new),
    };
    let root_bit = walker.eval(rng, 0, 0);
    let read_set = walker.read.map(|mut r| {
        r.sort_unstable();
        r
    });
    EvalOutcome {
        root_bit,
        leaves_read: walker.count,
        read_set,
    }
}

struct Walker<'a> {
    bits: &'a [bool],
    arity: usize,
    leaf_depth: u32,
    count: usize,
    read: Option<Vec<usize>>,
}

impl Walker<'_> {
    fn eval<S: UniformSource + ?Sized>(&mut self, rng: &mut S, depth: u32, index: usize) -> bool {
        if depth == self.leaf_depth {
            self.count += 1;
            if let Some(read) = self.read.as_mut() {
                read.push(index);
            }
            return self.bits[index];
        }
        let gate = Gate::at_depth(depth);
        let stop = gate.determining();
        // Lazy Fisher-Yates: only as many draws as children visited.
        let mut order: Vec<usize> = (0..self.arity).collect();
        for i in 0..self.arity {
            let j = i + rng.below(self.arity - i);
            order.swap(i, j);
            if self.eval(rng, depth + 1, index * self.arity + order[i]) == stop {
                return stop;
            }
        }
        !stop
    }
}
