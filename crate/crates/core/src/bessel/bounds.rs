//! Elementary upper bounds for I_ν and K_ν, checked as predicates.
//!
//! Each check compares logarithms, so bounds whose two sides overflow or
//! underflow in linear scale still produce a meaningful margin.

use alloc::vec::Vec;

use super::{eta, ln_gamma, log_i, log_k, BesselError};
use crate::math;

/// Relative slack granted to a bound before it counts as violated.
pub const MARGIN_FLOOR: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    /// I₀(t) ≤ eᵗ for t > 0.
    ZeroOrderI,
    /// K₀(t) ≤ √π e^{−t}/√(2t) for t > 0.
    ZeroOrderK,
    /// I_ν(t) ≤ eᵗ (t/2)^ν / Γ(ν+1) for ν > ½, t < 1.
    SmallArgumentI,
    /// K_ν(t) ≤ eᵗ Γ(ν) 2^{ν−1} / t^ν for ν > ½, t < 1.
    SmallArgumentK,
    /// I_ν(t) ≤ eᵗ/√(2πt) for ν > ½, t ≥ 1.
    LargeArgumentI,
    /// K_ν(t) ≤ C_M √π e^{−t}/√(2t) for ½ < ν ≤ M, t ≥ 1.
    LargeArgumentK { m_cap: f64, c_m: f64 },
    /// e^{νη(t)} e^{−νη(t₂)} ≤ e^{−ν(t₂−t)} for t ≤ t₂.
    EtaGap { t2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub bound: Bound,
    pub nu: f64,
    pub t: f64,
    pub ln_lhs: f64,
    pub ln_rhs: f64,
    /// (rhs − lhs)/rhs.
    pub relative_margin: f64,
    pub holds: bool,
}

impl BoundCheck {
    fn new(bound: Bound, nu: f64, t: f64, ln_lhs: f64, ln_rhs: f64) -> Self {
        let relative_margin = -math::expm1(ln_lhs - ln_rhs);
        Self { bound, nu, t, ln_lhs, ln_rhs, relative_margin, holds: relative_margin >= MARGIN_FLOOR }
    }
}

fn in_region(bound: Bound, nu: f64, t: f64) -> bool {
    if !(t > 0.0) {
        return false;
    }
    match bound {
        Bound::ZeroOrderI | Bound::ZeroOrderK => nu == 0.0,
        Bound::SmallArgumentI | Bound::SmallArgumentK => nu > 0.5 && t < 1.0,
        Bound::LargeArgumentI => nu > 0.5 && t >= 1.0,
        Bound::LargeArgumentK { m_cap, .. } => nu > 0.5 && nu <= m_cap && t >= 1.0,
        Bound::EtaGap { t2 } => nu > 0.0 && t <= t2,
    }
}

/// Evaluate one bound at (ν, t); errors if (ν, t) is outside the bound's hypotheses.
pub fn check_bound(bound: Bound, nu: f64, t: f64) -> Result<BoundCheck, BesselError> {
    if !in_region(bound, nu, t) {
        return Err(BesselError::OutsideRegion { bound, nu, t });
    }
    let half_ln_pi = 0.5 * math::ln(math::PI);
    let (lhs, rhs) = match bound {
        Bound::ZeroOrderI => (log_i(0.0, t)?.ln, t),
        Bound::ZeroOrderK => (log_k(0.0, t)?.ln, half_ln_pi - t - 0.5 * math::ln(2.0 * t)),
        Bound::SmallArgumentI => (log_i(nu, t)?.ln, t + nu * math::ln(0.5 * t) - ln_gamma(nu + 1.0)?),
        Bound::SmallArgumentK => (
            log_k(nu, t)?.ln,
            t + ln_gamma(nu)? + (nu - 1.0) * math::LN_2 - nu * math::ln(t),
        ),
        Bound::LargeArgumentI => (log_i(nu, t)?.ln, t - 0.5 * math::ln(math::TAU * t)),
        Bound::LargeArgumentK { c_m, .. } => {
            (log_k(nu, t)?.ln, math::ln(c_m) + half_ln_pi - t - 0.5 * math::ln(2.0 * t))
        }
        Bound::EtaGap { t2 } => (nu * (eta(t) - eta(t2)), -nu * (t2 - t)),
    };
    Ok(BoundCheck::new(bound, nu, t, lhs, rhs))
}

/// The η-gap inequality for the pair t₁ ≤ t₂.
pub fn eta_gap(nu: f64, t1: f64, t2: f64) -> Result<BoundCheck, BesselError> {
    check_bound(Bound::EtaGap { t2 }, nu, t1)
}

/// Every single-point bound whose hypotheses contain (ν, t).
pub fn bound_suite(nu: f64, t: f64, calibration: Option<&CmCalibration>) -> Result<Vec<BoundCheck>, BesselError> {
    let mut candidates = alloc::vec![
        Bound::ZeroOrderI,
        Bound::ZeroOrderK,
        Bound::SmallArgumentI,
        Bound::SmallArgumentK,
        Bound::LargeArgumentI,
    ];
    if let Some(c) = calibration {
        candidates.push(Bound::LargeArgumentK { m_cap: c.m_cap, c_m: c.c_m });
    }
    candidates
        .into_iter()
        .filter(|b| in_region(*b, nu, t))
        .map(|b| check_bound(b, nu, t))
        .collect()
}

/// Empirical constant for the large-argument K bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmCalibration {
    pub m_cap: f64,
    /// max over the sample of K_ν(t) / (√π e^{−t}/√(2t)).
    pub c_m: f64,
    /// The explicit constant 2^{M−½} + Γ(2M)/Γ(M+½) obtained by bounding both
    /// halves of the K-integral; the empirical value must not exceed it.
    pub c_m_explicit: f64,
    /// Largest ratio of the empirical quotient to its pointwise explicit bound.
    pub worst_pointwise_fraction: f64,
}

/// Compute C_M as the maximum sampled quotient over `samples` ⊂ (½, M] × [1, ∞).
pub fn calibrate_c_m(m_cap: f64, samples: &[(f64, f64)]) -> Result<CmCalibration, BesselError> {
    let half_ln_pi = 0.5 * math::ln(math::PI);
    let mut c_m: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for &(nu, t) in samples {
        let probe = Bound::LargeArgumentK { m_cap, c_m: 1.0 };
        if !in_region(probe, nu, t) {
            return Err(BesselError::OutsideRegion { bound: probe, nu, t });
        }
        let ratio = math::exp(log_k(nu, t)?.ln - (half_ln_pi - t - 0.5 * math::ln(2.0 * t)));
        // Pointwise: 2^{ν−½} + t^{½−ν} Γ(2ν)/Γ(ν+½).
        let pointwise = math::exp((nu - 0.5) * math::LN_2)
            + math::exp((0.5 - nu) * math::ln(t) + ln_gamma(2.0 * nu)? - ln_gamma(nu + 0.5)?);
        c_m = c_m.max(ratio);
        worst = worst.max(ratio / pointwise);
    }
    let c_m_explicit =
        math::exp((m_cap - 0.5) * math::LN_2) + math::exp(ln_gamma(2.0 * m_cap)? - ln_gamma(m_cap + 0.5)?);
    Ok(CmCalibration { m_cap, c_m, c_m_explicit, worst_pointwise_fraction: worst })
}
