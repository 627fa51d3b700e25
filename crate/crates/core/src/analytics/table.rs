//! Growth exponent, variance constant and critical tail exponent per arity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{spectral, variance_constant};
use crate::error::Result;

/// The arities of the reference table.
pub const TABLE1_ARITIES: [usize; 21] = [
    2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 20, 30, 40, 50, 100,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub m: usize,
    pub alpha: f64,
    pub d: f64,
    /// `1/(1-α)`.
    pub kappa: f64,
}

impl Table1Row {
    /// Values rounded to the printed precision (3, 4 and 3 decimals).
    pub fn rounded(&self) -> (f64, f64, f64) {
        let r = |x: f64, p: i32| (x * 10f64.powi(p)).round() / 10f64.powi(p);
        (r(self.alpha, 3), r(self.d, 4), r(self.kappa, 3))
    }
}

pub fn table1(arities: &[usize]) -> Result<Vec<Table1Row>> {
    arities
        .par_iter()
        .map(|&m| {
            let s = spectral(m)?;
            Ok(Table1Row {
                m,
                alpha: s.alpha,
                d: variance_constant(m)?.d,
                kappa: s.kappa_max(),
            })
        })
        .collect()
}
