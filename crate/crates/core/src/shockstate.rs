//! Polytropic gas relations and the uniform attached-shock state behind a wedge.
//!
//! Unknowns are the density ratio α = ρ⁺/ρ₀ and the shock slope s₀. The
//! downstream velocity follows from α and s₀ in closed form; the Bernoulli
//! relation and the slip condition u₃ = b₀u₁ on the ramp close the system.

use alloc::vec::Vec;

use crate::math;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShockError {
    #[error("adiabatic exponent must lie in (1, 3), got {0}")]
    InvalidGamma(f64),
    #[error("pressure constant must be positive, got {0}")]
    InvalidPressureConstant(f64),
    #[error("density must be positive, got {0}")]
    NonPositiveDensity(f64),
    #[error("enthalpy must be positive, got {0}")]
    NonPositiveEnthalpy(f64),
    #[error("ramp slope must be positive and finite, got {0}")]
    InvalidSlope(f64),
    #[error("upstream speed {q0} is not supersonic (sound speed {c0})")]
    SubsonicUpstream { q0: f64, c0: f64 },
    #[error("no attached strong-shock root: {0}")]
    NoRoot(BracketDiagnostics),
    #[error("root violates the entropy condition (alpha = {0})")]
    EntropyViolation(f64),
    #[error("downstream state is not subsonic (speed^2 = {speed_sq}, sound^2 = {sound_sq})")]
    NotSubsonic { speed_sq: f64, sound_sq: f64 },
}

/// What the bracketing search saw when no root was found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketDiagnostics {
    /// Smallest density ratio for which the slope quadratic has real roots.
    pub alpha_min: f64,
    /// Scaled Bernoulli residual at `alpha_min`; a non-negative value means detachment.
    pub residual_at_alpha_min: f64,
    pub newton_iterations: usize,
}

impl core::fmt::Display for BracketDiagnostics {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "alpha_min = {}, residual at alpha_min = {}, newton iterations = {}",
            self.alpha_min, self.residual_at_alpha_min, self.newton_iterations
        )
    }
}

/// Polytropic gas p = Aρ^γ with the upstream density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasParams {
    gamma: f64,
    a_const: f64,
    rho0: f64,
}

impl GasParams {
    pub fn new(gamma: f64, a_const: f64, rho0: f64) -> Result<Self, ShockError> {
        if !(gamma > 1.0 && gamma < 3.0) {
            return Err(ShockError::InvalidGamma(gamma));
        }
        if !(a_const > 0.0) || !a_const.is_finite() {
            return Err(ShockError::InvalidPressureConstant(a_const));
        }
        if !(rho0 > 0.0) || !rho0.is_finite() {
            return Err(ShockError::NonPositiveDensity(rho0));
        }
        Ok(Self { gamma, a_const, rho0 })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn a_const(&self) -> f64 {
        self.a_const
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    fn check_density(rho: f64) -> Result<(), ShockError> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(ShockError::NonPositiveDensity(rho));
        }
        Ok(())
    }

    /// c² = Aγρ^{γ−1}.
    pub fn sound_speed_sq(&self, rho: f64) -> Result<f64, ShockError> {
        Self::check_density(rho)?;
        Ok(self.a_const * self.gamma * math::pow(rho, self.gamma - 1.0))
    }

    pub fn sound_speed(&self, rho: f64) -> Result<f64, ShockError> {
        Ok(math::sqrt(self.sound_speed_sq(rho)?))
    }

    /// h = c²/(γ−1).
    pub fn enthalpy(&self, rho: f64) -> Result<f64, ShockError> {
        Ok(self.sound_speed_sq(rho)? / (self.gamma - 1.0))
    }

    pub fn inverse_enthalpy(&self, h: f64) -> Result<f64, ShockError> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(ShockError::NonPositiveEnthalpy(h));
        }
        Ok(math::pow((self.gamma - 1.0) * h / (self.a_const * self.gamma), 1.0 / (self.gamma - 1.0)))
    }

    /// Bernoulli constant q₀²/2 + h(ρ₀).
    pub fn bernoulli_constant(&self, q0: f64) -> f64 {
        0.5 * q0 * q0 + self.a_const * self.gamma * math::pow(self.rho0, self.gamma - 1.0) / (self.gamma - 1.0)
    }
}

/// Supersonic incoming stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpstreamState {
    pub q0: f64,
    pub bernoulli_c0: f64,
}

impl UpstreamState {
    pub fn new(gas: &GasParams, q0: f64) -> Result<Self, ShockError> {
        let c0 = gas.sound_speed(gas.rho0)?;
        if !(q0 > c0) || !q0.is_finite() {
            return Err(ShockError::SubsonicUpstream { q0, c0 });
        }
        Ok(Self { q0, bernoulli_c0: gas.bernoulli_constant(q0) })
    }
}

/// Ramp x₃ = b₀x₁ with half-angle θ₀ = arctan b₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeGeometry {
    pub b0: f64,
    pub theta0: f64,
}

impl WedgeGeometry {
    pub fn new(b0: f64) -> Result<Self, ShockError> {
        if !(b0 > 0.0) || !b0.is_finite() {
            return Err(ShockError::InvalidSlope(b0));
        }
        Ok(Self { b0, theta0: math::atan(b0) })
    }
}

/// Which procedure produced the accepted root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverPath {
    Newton,
    Bisection,
}

/// Downstream state of the attached shock.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundState {
    pub s0: f64,
    pub alpha: f64,
    pub rho_plus: f64,
    pub u1_plus: f64,
    pub u3_plus: f64,
    pub c_plus_sq: f64,
    /// Max of the four scaled residuals of the jump/Bernoulli/slip system.
    pub residual: f64,
    /// Scaled residuals: mass flux, tangential velocity, Bernoulli, slip.
    pub residuals: [f64; 4],
    pub path: SolverPath,
    /// The other root of the slope quadratic, if it solves the system too.
    pub weak_branch: Option<WeakBranch>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakBranch {
    pub s0: f64,
    pub alpha: f64,
    pub downstream_mach_sq: f64,
}

impl BackgroundState {
    pub fn speed_sq(&self) -> f64 {
        self.u1_plus * self.u1_plus + self.u3_plus * self.u3_plus
    }
}

/// Leading-order large-q₀ behaviour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadingOrder {
    pub s0: f64,
    pub rho_plus: f64,
    pub alpha: f64,
    pub c_plus_sq: f64,
    /// Leading value of (q₀⁺)² − c²(ρ₀⁺).
    pub speed_gap: f64,
    /// Predicted exponent of u₁₀⁺ (and u₃₀⁺) as a power of q₀.
    pub velocity_exponent: f64,
    /// Predicted exponent of s₀ and ρ₀⁺.
    pub growth_exponent: f64,
}

/// Leading-order formulas with the O(·) corrections dropped.
pub fn asymptotic_background(gas: &GasParams, q0: f64, geom: &WedgeGeometry) -> LeadingOrder {
    let g = gas.gamma;
    let factor = math::pow((g - 1.0) / (2.0 * gas.a_const * g), 1.0 / (g - 1.0)) * math::pow(q0, 2.0 / (g - 1.0));
    let c_plus_sq = 0.5 * (g - 1.0) * q0 * q0;
    LeadingOrder {
        s0: factor / (geom.b0 * gas.rho0),
        rho_plus: factor,
        alpha: factor / gas.rho0,
        c_plus_sq,
        speed_gap: -c_plus_sq,
        velocity_exponent: (g - 3.0) / (g - 1.0),
        growth_exponent: 2.0 / (g - 1.0),
    }
}

struct Problem {
    gm1: f64,
    /// ρ₀^{1−γ}(γ−1)q₀²/(2Aγ).
    kq: f64,
    b0: f64,
}

impl Problem {
    fn new(gas: &GasParams, q0: f64, b0: f64) -> Self {
        let gm1 = gas.gamma - 1.0;
        let kq = math::pow(gas.rho0, -gm1) * gm1 * q0 * q0 / (2.0 * gas.a_const * gas.gamma);
        Self { gm1, kq, b0 }
    }

    /// Scaled Bernoulli equation: 1 − (1 + kq·s²/(1+s²)·(1 − α⁻²)) α^{1−γ}.
    fn bernoulli(&self, alpha: f64, s: f64) -> f64 {
        let frac = 1.0 / (1.0 + 1.0 / (s * s));
        1.0 - (1.0 + self.kq * frac * (1.0 - 1.0 / (alpha * alpha))) * math::pow(alpha, -self.gm1)
    }

    /// Scaled slope relation: b₀s/α − (1 − 1/α) + b₀/s.
    fn slope(&self, alpha: f64, s: f64) -> f64 {
        self.b0 * s / alpha - (1.0 - 1.0 / alpha) + self.b0 / s
    }

    fn jacobian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let ex = math::exp(-self.gm1 * x);
        let e2x = math::exp(-2.0 * x);
        let frac = 1.0 / (1.0 + math::exp(-2.0 * y));
        let body = 1.0 + self.kq * frac * (1.0 - e2x);
        let f1x = self.gm1 * ex * body - ex * self.kq * frac * 2.0 * e2x;
        let f1y = -ex * self.kq * (1.0 - e2x) * 2.0 * frac * (1.0 - frac);
        let f2x = -self.b0 * math::exp(y - x) - math::exp(-x);
        let f2y = self.b0 * math::exp(y - x) - self.b0 * math::exp(-y);
        [[f1x, f1y], [f2x, f2y]]
    }

    fn residual(&self, x: f64, y: f64) -> [f64; 2] {
        let alpha = math::exp(x);
        let s = math::exp(y);
        [self.bernoulli(alpha, s), self.slope(alpha, s)]
    }

    /// Slope roots (strong, weak) for a given α, if real.
    fn slopes(&self, alpha: f64) -> Option<(f64, f64)> {
        let am1 = alpha - 1.0;
        let disc = am1 * am1 - 4.0 * alpha * self.b0 * self.b0;
        if disc < 0.0 {
            return None;
        }
        let strong = (am1 + math::sqrt(disc)) / (2.0 * self.b0);
        Some((strong, alpha / strong))
    }

    fn alpha_min(&self) -> f64 {
        let b2 = self.b0 * self.b0;
        1.0 + 2.0 * b2 + 2.0 * self.b0 * math::sqrt(1.0 + b2)
    }
}

const NEWTON_MAX: usize = 100;

fn newton(p: &Problem, alpha0: f64, s0: f64) -> (Option<(f64, f64)>, usize) {
    let mut x = math::ln(alpha0);
    let mut y = math::ln(s0);
    let norm = |r: [f64; 2]| math::abs(r[0]).max(math::abs(r[1]));
    let mut r = p.residual(x, y);
    for it in 1..=NEWTON_MAX {
        let j = p.jacobian(x, y);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return (None, it);
        }
        let dx = -(j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let dy = -(-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        let mut lambda = 1.0;
        let current = norm(r);
        let mut accepted = false;
        for _ in 0..40 {
            let trial = p.residual(x + lambda * dx, y + lambda * dy);
            if norm(trial).is_finite() && norm(trial) < current {
                x += lambda * dx;
                y += lambda * dy;
                r = trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        let step = math::abs(lambda * dx).max(math::abs(lambda * dy));
        if norm(r) <= 4.0 * f64::EPSILON || (accepted && step <= 1e-15) {
            return (Some((math::exp(x), math::exp(y))), it);
        }
        if !accepted {
            let done = norm(r) <= 1e-13;
            return (done.then(|| (math::exp(x), math::exp(y))), it);
        }
    }
    (None, NEWTON_MAX)
}

/// Root of the Bernoulli equation along one slope branch by bisection in ln α.
fn bisect_branch(p: &Problem, strong: bool) -> Option<(f64, f64)> {
    let branch = |alpha: f64| -> Option<(f64, f64)> {
        let (s_strong, s_weak) = p.slopes(alpha)?;
        let s = if strong { s_strong } else { s_weak };
        Some((p.bernoulli(alpha, s), s))
    };
    let lo0 = p.alpha_min() * (1.0 + 1e-14);
    let (f_lo0, _) = branch(lo0)?;
    if f_lo0 >= 0.0 {
        return None;
    }
    // Expand geometrically until the residual turns positive.
    let mut lo = lo0;
    let mut hi = lo0 * 2.0;
    let mut found = false;
    for _ in 0..2000 {
        let (f_hi, _) = branch(hi)?;
        if f_hi > 0.0 {
            found = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return None;
        }
    }
    if !found {
        return None;
    }
    let (mut a, mut b) = (math::ln(lo), math::ln(hi));
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let (f_mid, _) = branch(math::exp(mid))?;
        if f_mid > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    let alpha = math::exp(0.5 * (a + b));
    let (_, s) = branch(alpha)?;
    Some((alpha, s))
}

struct Downstream {
    u1: f64,
    u3: f64,
    rho_plus: f64,
    c_plus_sq: f64,
}

fn downstream(gas: &GasParams, q0: f64, alpha: f64, s: f64) -> Result<Downstream, ShockError> {
    let inv = 1.0 / (1.0 + s * s);
    let frac = s * s * inv;
    let u3 = s * q0 * inv * (1.0 - 1.0 / alpha);
    let u1 = q0 * inv + frac * q0 / alpha;
    let rho_plus = alpha * gas.rho0;
    Ok(Downstream { u1, u3, rho_plus, c_plus_sq: gas.sound_speed_sq(rho_plus)? })
}

fn system_residuals(gas: &GasParams, q0: f64, b0: f64, s: f64, d: &Downstream) -> Result<[f64; 4], ShockError> {
    let c0 = gas.bernoulli_constant(q0);
    let mass = (s * (d.rho_plus * d.u1 - gas.rho0 * q0) - d.rho_plus * d.u3) / (gas.rho0 * q0 * s);
    let tangential = (d.u1 - q0 + s * d.u3) / q0;
    let bernoulli = (0.5 * (d.u1 * d.u1 + d.u3 * d.u3) + gas.enthalpy(d.rho_plus)? - c0) / c0;
    let slip = (d.u3 - b0 * d.u1) / math::abs(d.u3).max(f64::MIN_POSITIVE);
    Ok([mass, tangential, bernoulli, slip])
}

/// Solve for the attached strong (transonic) shock state.
pub fn solve_background(gas: &GasParams, q0: f64, geom: &WedgeGeometry) -> Result<BackgroundState, ShockError> {
    UpstreamState::new(gas, q0)?;
    let p = Problem::new(gas, q0, geom.b0);
    let lead = asymptotic_background(gas, q0, geom);
    let (newton_root, iterations) = newton(&p, lead.alpha.max(p.alpha_min() * 1.5), lead.s0.max(geom.b0 * 2.0));
    // Accept Newton only on the strong branch (s₀ above √α, the geometric mean of the slope roots).
    let newton_root = newton_root.filter(|&(alpha, s)| alpha > 1.0 && s * s > alpha);
    let (alpha, s, path) = match newton_root {
        Some((alpha, s)) => (alpha, s, SolverPath::Newton),
        None => match bisect_branch(&p, true) {
            Some((alpha, s)) => (alpha, s, SolverPath::Bisection),
            None => {
                let amin = p.alpha_min();
                let residual_at_alpha_min = p.slopes(amin * (1.0 + 1e-14)).map_or(f64::NAN, |(s, _)| p.bernoulli(amin, s));
                return Err(ShockError::NoRoot(BracketDiagnostics {
                    alpha_min: amin,
                    residual_at_alpha_min,
                    newton_iterations: iterations,
                }));
            }
        },
    };
    if !(alpha > 1.0) {
        return Err(ShockError::EntropyViolation(alpha));
    }
    let d = downstream(gas, q0, alpha, s)?;
    let speed_sq = d.u1 * d.u1 + d.u3 * d.u3;
    if !(speed_sq < d.c_plus_sq) {
        return Err(ShockError::NotSubsonic { speed_sq, sound_sq: d.c_plus_sq });
    }
    let residuals = system_residuals(gas, q0, geom.b0, s, &d)?;
    let residual = residuals.iter().fold(0.0f64, |m, r| m.max(math::abs(*r)));
    let weak_branch = bisect_branch(&p, false).and_then(|(wa, ws)| {
        let wd = downstream(gas, q0, wa, ws).ok()?;
        Some(WeakBranch { s0: ws, alpha: wa, downstream_mach_sq: (wd.u1 * wd.u1 + wd.u3 * wd.u3) / wd.c_plus_sq })
    });
    Ok(BackgroundState {
        s0: s,
        alpha,
        rho_plus: d.rho_plus,
        u1_plus: d.u1,
        u3_plus: d.u3,
        c_plus_sq: d.c_plus_sq,
        residual,
        residuals,
        path,
        weak_branch,
    })
}

/// First q₀ of an ascending sweep at which the strong branch is found.
pub fn smallest_strong_q0(gas: &GasParams, geom: &WedgeGeometry, sweep: &[f64]) -> Option<f64> {
    sweep.iter().copied().find(|&q0| solve_background(gas, q0, geom).is_ok())
}

/// One row of a q₀ sweep comparing the solved state with leading order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub q0: f64,
    pub state: BackgroundState,
    pub leading: LeadingOrder,
    pub s0_ratio: f64,
}

pub fn sweep(gas: &GasParams, geom: &WedgeGeometry, q0s: &[f64]) -> Result<Vec<SweepRow>, ShockError> {
    q0s.iter()
        .map(|&q0| {
            let state = solve_background(gas, q0, geom)?;
            let leading = asymptotic_background(gas, q0, geom);
            let s0_ratio = state.s0 / leading.s0;
            Ok(SweepRow { q0, state, leading, s0_ratio })
        })
        .collect()
}

/// True when |ratio − 1| shrinks at every step, allowing at most one step that
/// grows by no more than `slack` (relative).
pub fn converges_in_trend(ratios: &[f64], slack: f64) -> bool {
    let mut allowance = 1usize;
    for w in ratios.windows(2) {
        let (a, b) = (math::abs(w[0] - 1.0), math::abs(w[1] - 1.0));
        if b < a {
            continue;
        }
        if allowance > 0 && b <= a * (1.0 + slack) {
            allowance -= 1;
            continue;
        }
        return false;
    }
    true
}
