//! Toll terms, the moment-generating-function constant `K_q` and the
//! resulting tail bound `P((C - E C)/n^α > t) <= exp(-L_κ t^κ)`.

use serde::{Deserialize, Serialize};

use super::moments::CoinMoments;
use super::{check_arity, spectral, Provenance, SpectralData};
use crate::error::{invalid, Error, Result};

/// Overlap constant of the small- and large-`‖s‖` regimes.
pub const OVERLAP_C: f64 = 1.53;
/// Largest level scanned when taking suprema over `k`.
pub const DEFAULT_K_MAX: u32 = 60;
/// Scan stops once both sequences move by less than this.
pub const SUP_TOLERANCE: f64 = 1e-12;

/// Second moment and essential supremum of the toll term at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TollMoments {
    pub k: u32,
    /// `E‖b_n‖²`.
    pub mean_sq: f64,
    /// `‖b_n‖_{2,∞} = ess sup ‖b_n‖`.
    pub ess_sup: f64,
}

/// `Ψ_q(c) = (e^c - 1 - c) / c^q`.
pub fn psi(q: f64, c: f64) -> f64 {
    (c.exp() - 1.0 - c) / c.powf(q)
}

/// Toll moments at level `k` given the normalized child mean
/// `ν = E Z_{n/m²} / λ1^{k-1}`.
fn toll_at(coins: &CoinMoments<f64>, spec: &SpectralData, nu: &[f64; 2], k: u32) -> TollMoments {
    let m = spec.m;
    let [c00, _, c11] = coins.coefficient_covariance(nu);
    let lam2 = spec.lambda1 * spec.lambda1;
    let mean = coins.propagate_mean(nu);
    // ‖T - E T‖² is a convex quadratic in (R, S) for each N, with
    // R = Σ_{r≤N} U_r and S = Σ_{r>N} U_r ranging over a box, so the
    // essential supremum sits on a corner.
    let mm1 = (m - 1) as f64;
    let mf = m as f64;
    let mut sup = 0.0f64;
    for n in 0..m {
        let nf = n as f64;
        for r in [0.0, nf * mm1] {
            for s in [0.0, (mm1 - nf) * mm1] {
                let w = mm1 * mm1 - r - s;
                let t0 = mf * nu[0] + nf * nu[1] + r * nu[0];
                let t1 = mf * nu[1] + nf * nu[0] + w * nu[0];
                let dev = (t0 - mean[0]).powi(2) + (t1 - mean[1]).powi(2);
                sup = sup.max(dev);
            }
        }
    }
    TollMoments {
        k,
        mean_sq: (c00 + c11) / lam2,
        ess_sup: (sup / lam2).sqrt(),
    }
}

/// Toll moments for `k = 1..=k_max`.
pub fn toll_moments(m: usize, k_max: u32) -> Result<Vec<TollMoments>> {
    check_arity(m)?;
    let spec = spectral(m)?;
    let coins = CoinMoments::float(m);
    let mut nu = [1.0f64, 1.0];
    let mut out = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        out.push(toll_at(&coins, &spec, &nu, k));
        let next = coins.propagate_mean(&nu);
        nu = [next[0] / spec.lambda1, next[1] / spec.lambda1];
    }
    Ok(out)
}

/// Suprema over `k` of the toll moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TollSummary {
    pub m: usize,
    /// `sup_k E‖b_n‖²`.
    pub sup_mean_sq: f64,
    /// `sup_k ‖b_n‖_{2,∞}`.
    pub sup_ess: f64,
    /// `sup_k ‖b_n‖²_{2,∞} / sup_k E‖b_n‖²`.
    pub sup_ratio: f64,
    /// `‖b_n‖²_{2,∞} / E‖b_n‖²` at the last level scanned.
    pub limit_ratio: f64,
    pub levels_scanned: u32,
    pub provenance: Provenance,
}

/// Scan `k = 1..` until both toll sequences settle (`< 1e-12` change) or
/// `k_max` is reached.
pub fn toll_sups(m: usize, k_max: u32) -> Result<TollSummary> {
    check_arity(m)?;
    let spec = spectral(m)?;
    let coins = CoinMoments::float(m);
    let mut nu = [1.0f64, 1.0];
    let mut prev: Option<TollMoments> = None;
    let (mut sup_e, mut sup_b) = (0.0f64, 0.0f64);
    for k in 1..=k_max {
        let cur = toll_at(&coins, &spec, &nu, k);
        sup_e = sup_e.max(cur.mean_sq);
        sup_b = sup_b.max(cur.ess_sup);
        if let Some(p) = prev {
            if (cur.mean_sq - p.mean_sq).abs() < SUP_TOLERANCE
                && (cur.ess_sup - p.ess_sup).abs() < SUP_TOLERANCE
            {
                return Ok(TollSummary {
                    m,
                    sup_mean_sq: sup_e,
                    sup_ess: sup_b,
                    sup_ratio: sup_b * sup_b / sup_e,
                    limit_ratio: cur.ess_sup * cur.ess_sup / cur.mean_sq,
                    levels_scanned: k,
                    provenance: Provenance::ScannedSup,
                });
            }
        }
        prev = Some(cur);
        let next = coins.propagate_mean(&nu);
        nu = [next[0] / spec.lambda1, next[1] / spec.lambda1];
    }
    Err(Error::Numeric(format!(
        "toll moments for m={m} did not settle within {k_max} levels"
    )))
}

/// Constants of the moment-generating-function bound
/// `E exp<s, Y_n> <= exp(K ‖s‖^q)` and the derived tail exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailConstants {
    pub m: usize,
    pub alpha: f64,
    pub q: f64,
    /// Overlap constant used in `Ψ_q(c)`.
    pub c: f64,
    /// `1 - m^{2(1 - qα)}`.
    pub xi: f64,
    pub psi_q: f64,
    pub sup_mean_sq: f64,
    pub sup_ess: f64,
    /// `K_q`.
    pub k: f64,
    /// `κ = q/(q-1)`.
    pub kappa: f64,
    /// `L_κ = K^{1-κ} (κ-1)^{κ-1} / κ^κ`.
    pub l: f64,
    pub provenance: Provenance,
}

/// Smallest `c` with `Ψ_1(c) >= ratio`, found by bisection.
fn overlap_constant(ratio: f64) -> f64 {
    if psi(1.0, OVERLAP_C) >= ratio {
        return OVERLAP_C;
    }
    let (mut lo, mut hi) = (OVERLAP_C, 2.0 * OVERLAP_C);
    while psi(1.0, hi) < ratio {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if psi(1.0, mid) >= ratio {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `K_q` for `q ∈ (1/α, 2)`.
///
/// For `m = 2` the overlap constant is `1.53`, re-checked against the
/// computed toll ratio. For larger `m` the same derivation is repeated with
/// the m-ary toll term; if `Ψ_1(1.53)` no longer covers the ratio, the
/// smallest admissible `c` is used instead.
pub fn mgf_constant(m: usize, q: f64) -> Result<TailConstants> {
    let spec = spectral(m)?;
    let lower = 1.0 / spec.alpha;
    if !(q > lower && q < 2.0) {
        return Err(invalid(format!(
            "q = {q} outside the admissible range ({lower:.6}, 2) for m={m}"
        )));
    }
    let tolls = toll_sups(m, DEFAULT_K_MAX)?;
    let c = overlap_constant(tolls.sup_ratio);
    if m == 2 && c != OVERLAP_C {
        return Err(Error::Numeric(format!(
            "Ψ_1({OVERLAP_C}) does not cover the toll ratio {}",
            tolls.sup_ratio
        )));
    }
    let mf = m as f64;
    let xi = 1.0 - mf.powf(2.0 * (1.0 - q * spec.alpha));
    let psi_q = psi(q, c);
    let k = tolls.sup_mean_sq / tolls.sup_ess.powf(2.0 - q) * psi_q / xi;
    let kappa = q / (q - 1.0);
    let l = k.powf(1.0 - kappa) * (kappa - 1.0).powf(kappa - 1.0) / kappa.powf(kappa);
    if !(k.is_finite() && k > 0.0 && l.is_finite() && l > 0.0) {
        return Err(Error::Numeric(format!(
            "degenerate K_q={k}, L={l} at q={q}"
        )));
    }
    Ok(TailConstants {
        m,
        alpha: spec.alpha,
        q,
        c,
        xi,
        psi_q,
        sup_mean_sq: tolls.sup_mean_sq,
        sup_ess: tolls.sup_ess,
        k,
        kappa,
        l,
        provenance: if m == 2 {
            Provenance::ScannedSup
        } else {
            Provenance::DerivedByAnalogy
        },
    })
}

/// A tail bound evaluated at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub t: f64,
    /// `exp(-L_κ t^κ)`.
    pub bound: f64,
    pub constants: TailConstants,
}

/// `exp(-L_κ t^κ)` for `κ ∈ (2, 1/(1-α))` and `t > 0`.
pub fn tail_bound(m: usize, kappa: f64, t: f64) -> Result<TailBound> {
    check_arity(m)?;
    let spec = spectral(m)?;
    if !(kappa > 2.0 && kappa < spec.kappa_max()) {
        return Err(invalid(format!(
            "kappa = {kappa} outside the admissible range (2, {:.6}) for m={m}",
            spec.kappa_max()
        )));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    let constants = mgf_constant(m, kappa / (kappa - 1.0))?;
    Ok(TailBound {
        t,
        bound: (-constants.l * t.powf(kappa)).exp(),
        constants,
    })
}
