//! Worst-case inputs by recursive block substitution.
//!
//! Starting from a single digit (the desired root value), every digit is
//! replaced `k` times by a block of `m^2` leaves: a `1` by [`one_block`], a
//! `0` by [`zero_block`]. Each block describes the two levels below an AND
//! node: `m` OR groups of `m` leaves. Inside a block the lone `1` of every OR
//! group sits last and the all-zero group of a `0` block comes first; the
//! cost law does not depend on these positions.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::tree::{LeafVector, TreeShape};
use crate::Caps;

/// Target value of the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootBit {
    Zero,
    One,
}

impl RootBit {
    pub fn value(self) -> bool {
        matches!(self, RootBit::One)
    }

    pub fn index(self) -> usize {
        self.value() as usize
    }
}

impl From<bool> for RootBit {
    fn from(b: bool) -> Self {
        if b {
            RootBit::One
        } else {
            RootBit::Zero
        }
    }
}

impl TryFrom<u8> for RootBit {
    type Error = crate::Error;

    fn try_from(d: u8) -> Result<Self> {
        match d {
            0 => Ok(RootBit::Zero),
            1 => Ok(RootBit::One),
            other => Err(invalid(format!("root bit must be 0 or 1, got {other}"))),
        }
    }
}

fn or_group_with_one(m: usize, out: &mut Vec<bool>) {
    out.extend(std::iter::repeat_n(false, m - 1));
    out.push(true);
}

/// `m` OR groups, each `m - 1` zeros followed by a one.
pub fn one_block(m: usize) -> Vec<bool> {
    assert!(m >= 2, "arity must be at least 2");
    let mut out = Vec::with_capacity(m * m);
    for _ in 0..m {
        or_group_with_one(m, &mut out);
    }
    out
}

/// One all-zero OR group followed by `m - 1` groups of `m - 1` zeros and a one.
pub fn zero_block(m: usize) -> Vec<bool> {
    assert!(m >= 2, "arity must be at least 2");
    let mut out = vec![false; m];
    out.reserve(m * m - m);
    for _ in 1..m {
        or_group_with_one(m, &mut out);
    }
    out
}

/// One round of substitution.
pub fn substitute(m: usize, digits: &[bool]) -> Vec<bool> {
    let one = one_block(m);
    let zero = zero_block(m);
    let mut out = Vec::with_capacity(digits.len() * m * m);
    for &d in digits {
        out.extend_from_slice(if d { &one } else { &zero });
    }
    out
}

/// The worst-case input of half-height `k` evaluating to `root`.
///
/// `k = 0` yields the single leaf `root`.
pub fn worst_input(m: usize, k: u32, root: RootBit) -> Result<LeafVector> {
    worst_input_with_caps(m, k, root, &Caps::default())
}

pub fn worst_input_with_caps(m: usize, k: u32, root: RootBit, caps: &Caps) -> Result<LeafVector> {
    let shape = TreeShape::with_caps(m, k, caps)?;
    let mut digits = vec![root.value()];
    for _ in 0..k {
        digits = substitute(m, &digits);
    }
    LeafVector::new(shape, digits)
}
