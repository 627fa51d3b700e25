//! First and second moments of the bivariate cost recursion.
//!
//! One step of the recursion writes the level-`k` pair as a sum of
//! independent level-`(k-1)` copies with random 0/1 coefficient matrices,
//! driven by `U_0, …, U_{m-1}` i.i.d. uniform on `{0, …, m-1}`. Writing
//! `N = U_0`, `R = Σ_{r ≤ N} U_r` and `W = Σ_{r=1}^{m-1} (m-1-U_r)`, the
//! conditional mean of the sum given the coins is
//!
//! ```text
//! T0 = m μ0 + N μ1 + R μ0
//! T1 = m μ1 + N μ0 + W μ0
//! ```
//!
//! and by the law of total covariance
//! `Cov(Z') = E[Σ_i A_i D A_iᵀ] + Cov(T)` with `D` the child covariance.

use nalgebra::{Matrix3, Vector3};
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{check_arity, q, qi, spectral, Provenance};
use crate::error::{Error, Result};

/// Moments of `U ~ unif{0, …, m-1}` and the arity, in a numeric type `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinMoments<T> {
    pub m: T,
    /// `E U = (m-1)/2`.
    pub e1: T,
    /// `Var U = (m^2-1)/12`.
    pub var: T,
}

impl CoinMoments<BigRational> {
    pub fn exact(m: usize) -> Self {
        let mi = m as i64;
        CoinMoments {
            m: qi(m as u64),
            e1: q(mi - 1, 2),
            var: q(mi * mi - 1, 12),
        }
    }
}

impl CoinMoments<f64> {
    pub fn float(m: usize) -> Self {
        let mf = m as f64;
        CoinMoments {
            m: mf,
            e1: (mf - 1.0) / 2.0,
            var: (mf * mf - 1.0) / 12.0,
        }
    }
}

impl<T: Clone + Num> CoinMoments<T> {
    /// Mean of the parent pair given the child mean.
    pub fn propagate_mean(&self, mu: &[T; 2]) -> [T; 2] {
        let (m, e1) = (self.m.clone(), self.e1.clone());
        let [mu0, mu1] = mu.clone();
        let m_minus_1 = m.clone() - T::one();
        [
            m.clone() * mu0.clone()
                + e1.clone() * mu1.clone()
                + e1.clone() * e1.clone() * mu0.clone(),
            m * mu1 + e1.clone() * mu0.clone() + m_minus_1 * e1 * mu0,
        ]
    }

    /// `Cov(T)` as `[c00, c01, c11]`.
    pub fn coefficient_covariance(&self, mu: &[T; 2]) -> [T; 3] {
        let (m, e1, v) = (self.m.clone(), self.e1.clone(), self.var.clone());
        let [mu0, mu1] = mu.clone();
        let two = T::one() + T::one();
        let var_r = e1.clone() * v.clone() + v.clone() * e1.clone() * e1.clone();
        let cov_nr = e1 * v.clone();
        let c00 = mu1.clone() * mu1.clone() * v.clone()
            + mu0.clone() * mu0.clone() * var_r
            + two * mu0.clone() * mu1.clone() * cov_nr;
        let c01 = mu0.clone() * mu1 * v.clone();
        let c11 = m * v * mu0.clone() * mu0;
        [c00, c01, c11]
    }

    /// `E[Σ_i A_i D A_iᵀ]` for a symmetric `D = [d00, d01, d11]`.
    pub fn propagate_covariance(&self, d: &[T; 3]) -> [T; 3] {
        let (m, e1) = (self.m.clone(), self.e1.clone());
        let [d00, d01, d11] = d.clone();
        [
            m.clone() * d00.clone()
                + e1.clone() * d11.clone()
                + e1.clone() * e1.clone() * d00.clone(),
            (m.clone() + e1.clone()) * d01,
            m.clone() * d11 + m * e1 * d00,
        ]
    }
}

/// Exact mean and second-moment matrix of `Z_n` at level `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecondMomentState {
    pub k: u32,
    pub mean: [BigRational; 2],
    /// `E[Z Zᵀ]` as `[s00, s01, s11]`.
    pub second: [BigRational; 3],
}

impl SecondMomentState {
    fn initial() -> Self {
        SecondMomentState {
            k: 0,
            mean: [qi(1), qi(1)],
            second: [qi(1), qi(1), qi(1)],
        }
    }

    /// `E[Z Zᵀ] - E Z E Zᵀ` as `[d00, d01, d11]`.
    pub fn covariance(&self) -> [BigRational; 3] {
        let [m0, m1] = &self.mean;
        [
            &self.second[0] - m0 * m0,
            &self.second[1] - m0 * m1,
            &self.second[2] - m1 * m1,
        ]
    }

    /// `Var C(v★)` at this level.
    pub fn variance_one(&self) -> BigRational {
        self.covariance()[2].clone()
    }

    pub fn variance_zero(&self) -> BigRational {
        self.covariance()[0].clone()
    }

    /// Whether the covariance is positive semidefinite.
    pub fn covariance_is_psd(&self) -> bool {
        let [d00, d01, d11] = self.covariance();
        d00 >= BigRational::zero() && d11 >= BigRational::zero() && &d00 * &d11 >= &d01 * &d01
    }
}

/// Propagate exact moments through the recursion for `k = 0..=k_max`.
pub fn second_moment_recursion(m: usize, k_max: u32) -> Result<Vec<SecondMomentState>> {
    check_arity(m)?;
    let coins = CoinMoments::exact(m);
    let mut out = Vec::with_capacity(k_max as usize + 1);
    let mut state = SecondMomentState::initial();
    out.push(state.clone());
    for k in 1..=k_max {
        let d = state.covariance();
        let inner = coins.propagate_covariance(&d);
        let outer = coins.coefficient_covariance(&state.mean);
        let mean = coins.propagate_mean(&state.mean);
        let cov: Vec<BigRational> = inner.iter().zip(outer.iter()).map(|(a, b)| a + b).collect();
        state = SecondMomentState {
            k,
            second: [
                &cov[0] + &mean[0] * &mean[0],
                &cov[1] + &mean[0] * &mean[1],
                &cov[2] + &mean[1] * &mean[1],
            ],
            mean,
        };
        out.push(state.clone());
    }
    Ok(out)
}

/// Covariance of the limit `G` of `Z_n / n^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceConstant {
    pub m: usize,
    /// `Var G_1`: `Var C(v★) ~ d n^{2α}`.
    pub d: f64,
    /// `[Var G_0, Cov(G_0, G_1), Var G_1]`.
    pub covariance: [f64; 3],
    pub provenance: Provenance,
}

/// Solve `λ1² D = E[Σ A_i D A_iᵀ] + Cov(T)` with `E G = (c0, c1)`.
///
/// This is the second-moment identity of the fixed-point equation for `G`
/// after normalization by `λ1 = m^{2α}`.
pub fn fixed_point_covariance(m: usize) -> Result<[f64; 3]> {
    check_arity(m)?;
    let spec = spectral(m)?;
    let coins = CoinMoments::float(m);
    let lam2 = spec.lambda1 * spec.lambda1;
    let mut op = Matrix3::<f64>::zeros();
    for j in 0..3 {
        let mut basis = [0.0f64; 3];
        basis[j] = 1.0;
        let col = coins.propagate_covariance(&basis);
        for i in 0..3 {
            op[(i, j)] = if i == j { lam2 } else { 0.0 } - col[i];
        }
    }
    let rhs = Vector3::from(coins.coefficient_covariance(&[spec.c0, spec.c1]));
    let sol = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric(format!("singular second-moment system for m={m}")))?;
    if !sol.iter().all(|x| x.is_finite()) {
        return Err(Error::Numeric(format!("non-finite fixed point for m={m}")));
    }
    Ok([sol[0], sol[1], sol[2]])
}

pub fn variance_constant(m: usize) -> Result<VarianceConstant> {
    let cov = fixed_point_covariance(m)?;
    Ok(VarianceConstant {
        m,
        d: cov[2],
        covariance: cov,
        provenance: Provenance::FixedPoint,
    })
}

/// `Var Z_{n,1} / λ1^{2k}` for `k = 0..=k_max`, from the exact recursion.
pub fn normalized_variances(m: usize, k_max: u32) -> Result<Vec<f64>> {
    let spec = spectral(m)?;
    let states = second_moment_recursion(m, k_max)?;
    Ok(states
        .iter()
        .map(|s| {
            let v = s.variance_one().to_f64().unwrap_or(f64::NAN);
            v / spec.lambda1.powi(2 * s.k as i32)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_levels_binary() {
        let states = second_moment_recursion(2, 2).unwrap();
        assert_eq!(states[0].variance_one(), qi(0));
        assert_eq!(states[1].mean, [q(11, 4), q(3, 1)]);
        assert_eq!(states[1].variance_one(), q(1, 2));
        // Var of {2:1/2, 3:1/4, 4:1/4}
        assert_eq!(states[1].variance_zero(), q(11, 16));
        assert!(states.iter().all(SecondMomentState::covariance_is_psd));
    }

    #[test]
    fn binary_d_matches_known_value() {
        let d = variance_constant(2).unwrap().d;
        assert!((d - 0.0938).abs() < 5e-5, "d = {d}");
    }

    #[test]
    fn ternary_d() {
        let d = variance_constant(3).unwrap().d;
        assert!((d - 0.0847).abs() < 5e-5, "d = {d}");
    }

    #[test]
    fn normalized_variance_converges() {
        let v = normalized_variances(2, 20).unwrap();
        let d = variance_constant(2).unwrap().d;
        assert!((v[20] - d).abs() / d < 1e-2);
    }
}
