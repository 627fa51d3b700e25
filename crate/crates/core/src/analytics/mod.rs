//! Closed-form and numerically solved constants of the worst-case cost.
//!
//! Conventions: the mean matrix has column `j` equal to the expected
//! `(type-0, type-1)` offspring of a type-`j` individual, and mean vectors are
//! `(E Z_{n,0}, E Z_{n,1})`, i.e. the expected costs on the worst inputs with
//! root value 0 and 1.

pub mod moments;
pub mod surd;
pub mod table;
pub mod tail;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::worst_case::RootBit;
use surd::QuadSurd;

pub use moments::{
    fixed_point_covariance, second_moment_recursion, variance_constant, CoinMoments,
    SecondMomentState, VarianceConstant,
};
pub use table::{table1, Table1Row, TABLE1_ARITIES};
pub use tail::{
    mgf_constant, tail_bound, toll_moments, toll_sups, TailBound, TailConstants, TollMoments,
    TollSummary,
};

/// Where a reported constant comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    ExactRecursion,
    FixedPoint,
    ScannedSup,
    /// m-ary tail constants obtained by repeating the binary argument.
    DerivedByAnalogy,
}

pub(crate) fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub(crate) fn qi(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn check_arity(m: usize) -> Result<()> {
    if m < 2 {
        Err(invalid(format!("arity must be at least 2, got {m}")))
    } else {
        Ok(())
    }
}

/// Expected offspring counts, exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeanMatrix(pub [[BigRational; 2]; 2]);

impl MeanMatrix {
    pub fn entry(&self, row: usize, col: usize) -> &BigRational {
        &self.0[row][col]
    }

    pub fn determinant(&self) -> BigRational {
        let m = &self.0;
        &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0]
    }

    pub fn trace(&self) -> BigRational {
        &self.0[0][0] + &self.0[1][1]
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, row: &[BigRational; 2]) -> [BigRational; 2] {
        let m = &self.0;
        [
            &row[0] * &m[0][0] + &row[1] * &m[1][0],
            &row[0] * &m[0][1] + &row[1] * &m[1][1],
        ]
    }

    pub fn to_f64(&self) -> [[f64; 2]; 2] {
        use num_traits::ToPrimitive;
        let f = |x: &BigRational| x.to_f64().unwrap_or(f64::NAN);
        [
            [f(&self.0[0][0]), f(&self.0[0][1])],
            [f(&self.0[1][0]), f(&self.0[1][1])],
        ]
    }
}

/// `[[m + ((m-1)/2)^2, m(m-1)/2], [(m-1)/2, m]]`.
pub fn mean_matrix(m: usize) -> Result<MeanMatrix> {
    check_arity(m)?;
    let mm = qi(m as u64);
    let half = q(m as i64 - 1, 2);
    Ok(MeanMatrix([
        [&mm + &half * &half, &mm * &half],
        [half, mm.clone()],
    ]))
}

/// `(E Z_{n,0}, E Z_{n,1})` at half-height `k`, exact.
pub fn mean_vector(m: usize, k: u32) -> Result<[BigRational; 2]> {
    let mat = mean_matrix(m)?;
    let mut row = [BigRational::one(), BigRational::one()];
    for _ in 0..k {
        row = mat.left_mul(&row);
    }
    Ok(row)
}

/// `(1,1) M^k e_start`: the exact mean cost on the worst input with the given
/// root value.
pub fn expected_cost(m: usize, k: u32, start: RootBit) -> Result<BigRational> {
    let [z0, z1] = mean_vector(m, k)?;
    Ok(match start {
        RootBit::Zero => z0,
        RootBit::One => z1,
    })
}

/// Eigen-data of the mean matrix and the limiting mean constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub m: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `log_{m^2} λ1`.
    pub alpha: f64,
    /// `log_{m^2} λ2`, with `λ2 > 0`.
    pub beta: f64,
    pub c0: f64,
    pub c1: f64,
    /// `c1 - 1`, so that `E C = c1 λ1^k - c2 λ2^k`.
    pub c2: f64,
}

impl SpectralData {
    /// `n^α = λ1^k`.
    pub fn n_alpha(&self, k: u32) -> f64 {
        self.lambda1.powi(k as i32)
    }

    /// `1/(1-α)`, the upper end of admissible tail exponents.
    pub fn kappa_max(&self) -> f64 {
        1.0 / (1.0 - self.alpha)
    }

    /// `c λ1^k - (c-1) λ2^k` with `c = c1` for root 1 and `c = c0` for root 0.
    pub fn mean_closed_form(&self, k: u32, start: RootBit) -> f64 {
        let c = match start {
            RootBit::Zero => self.c0,
            RootBit::One => self.c1,
        };
        c * self.lambda1.powi(k as i32) - (c - 1.0) * self.lambda2.powi(k as i32)
    }
}

/// `16m + (m-1)^2`, the radicand appearing in the eigenvalues.
pub fn radicand(m: usize) -> u64 {
    let m = m as u64;
    16 * m + (m - 1) * (m - 1)
}

pub fn spectral(m: usize) -> Result<SpectralData> {
    check_arity(m)?;
    let mf = m as f64;
    let s = (radicand(m) as f64).sqrt();
    let trace = 2.0 * mf + (mf - 1.0).powi(2) / 4.0;
    let gap = (mf - 1.0) * s / 8.0;
    let lambda1 = trace / 2.0 + gap;
    // λ2 = det/λ1 avoids cancellation for large m.
    let lambda2 = mf * mf / lambda1;
    let log_m2 = 2.0 * mf.ln();
    let c0 = 0.5 + (mf + 3.0) / (2.0 * s);
    let c1 = 0.5 + (3.0 * mf + 1.0) / (2.0 * s);
    Ok(SpectralData {
        m,
        lambda1,
        lambda2,
        alpha: lambda1.ln() / log_m2,
        beta: lambda2.ln() / log_m2,
        c0,
        c1,
        c2: c1 - 1.0,
    })
}

/// The same constants as exact elements of `Q(√(16m + (m-1)^2))`.
#[derive(Debug, Clone)]
pub struct ExactSpectrum {
    pub lambda1: QuadSurd,
    pub lambda2: QuadSurd,
    pub c0: QuadSurd,
    pub c1: QuadSurd,
}

impl ExactSpectrum {
    pub fn new(m: usize) -> Result<Self> {
        check_arity(m)?;
        let d = BigInt::from(radicand(m));
        let dq = BigRational::from_integer(d.clone());
        let mi = m as i64;
        let half_trace = q(mi, 1) + q((mi - 1) * (mi - 1), 8);
        let gap = q(mi - 1, 8);
        // (3m+1)/(2√D) = (3m+1)√D / (2D)
        let c = |num: i64| QuadSurd::new(q(1, 2), q(num, 2) / &dq, d.clone());
        Ok(ExactSpectrum {
            lambda1: QuadSurd::new(half_trace.clone(), gap.clone(), d.clone()),
            lambda2: QuadSurd::new(half_trace, -gap, d.clone()),
            c0: c(mi + 3),
            c1: c(3 * mi + 1),
        })
    }

    /// `c λ1^k - (c-1) λ2^k`, exact.
    pub fn mean_closed_form(&self, k: u32, start: RootBit) -> QuadSurd {
        let c = match start {
            RootBit::Zero => &self.c0,
            RootBit::One => &self.c1,
        };
        let one = QuadSurd::rational(BigRational::one(), &c.d);
        let c_minus = c - &one;
        &(c * &self.lambda1.pow(k)) - &(&c_minus * &self.lambda2.pow(k))
    }
}
