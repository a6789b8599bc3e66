//! Eigenfunction-expansion solver for the cut-off mixed Neumann problem in
//! the bounded wedge {0 < r < L, θ₀ < θ < π/2, y₂ ∈ 𝕋}.
//!
//! The pipeline is: optional Neumann lift, projection of the source onto
//! cos(√μ_m(θ−θ₀))·{sin, cos}(n y₂), one radial two-point problem per mode,
//! edge pinning, and a fixed-order assembly of the truncated series.

mod grid;
mod lift;
mod project;
mod radial;
mod solve;
mod tail;

use core::fmt;

pub use grid::{GridSpec, Probe, RadialGrid};
pub use lift::{neumann_lift, BoundaryDatum, Jet, NeumannLift, ZeroDatum};
pub use project::{compat_constant, project_modes, AngularRule, ModeTable, Source};
pub use radial::{radial_00, radial_0n, radial_m0, radial_mn, ModeKind, RadialMode, RadialSample};
pub use solve::{
    assemble, solve_cutoff, solve_modes, CutoffOptions, FieldSample, ResidualReport, SeriesSolution,
};
pub use tail::{tail_diagnostics, TailReport};

pub(crate) use project::{collect as table_from_projections, project_slab, NodeProjection};
pub(crate) use solve::combine_modes;

use crate::bessel::BesselError;
use crate::math;

pub const TOL_PDE: f64 = 1e-6;
pub const TOL_BC: f64 = 1e-7;
pub const TOL_EDGE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("inner angle must lie in (0, π/2), got {0}")]
    InvalidAngle(f64),
    #[error("outer radius must be at least 4, got {0}")]
    RadiusTooSmall(f64),
    #[error("truncation needs m_max ≥ 1 and n_max ≥ 1")]
    InvalidTruncation,
    #[error("weight exponents out of range: {0}")]
    InvalidWeights(&'static str),
    #[error("invalid radial grid: {0}")]
    InvalidGrid(&'static str),
    #[error("point (r = {r}, θ = {theta}) lies outside the wedge")]
    OutOfDomain { r: f64, theta: f64 },
    #[error("derivatives are not available at r = 0")]
    DerivativeAtEdge,
    #[error("compatibility violated: L·c_L − ∫ξ f₀₀ = {defect:e} exceeds {tolerance:e}")]
    CompatibilityViolation { defect: f64, tolerance: f64 },
    #[error("non-finite source value at r = {r}, θ = {theta}, y₂ = {y2}")]
    NonFiniteSource { r: f64, theta: f64, y2: f64 },
    #[error(transparent)]
    Bessel(#[from] BesselError),
}

/// The bounded wedge Q_L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeDomain {
    theta0: f64,
    length: f64,
}

impl WedgeDomain {
    pub fn new(theta0: f64, length: f64) -> Result<Self, SpectralError> {
        if !(theta0 > 0.0 && theta0 < math::FRAC_PI_2) {
            return Err(SpectralError::InvalidAngle(theta0));
        }
        if !(length >= 4.0) || !length.is_finite() {
            return Err(SpectralError::RadiusTooSmall(length));
        }
        Ok(Self { theta0, length })
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Angular width π/2 − θ₀.
    pub fn aperture(&self) -> f64 {
        math::FRAC_PI_2 - self.theta0
    }

    /// √μ_m = mπ/(π/2 − θ₀).
    pub fn angular_order(&self, m: usize) -> f64 {
        m as f64 * math::PI / self.aperture()
    }

    pub fn contains(&self, r: f64, theta: f64) -> bool {
        let slack = 1e-12;
        r >= 0.0 && r <= self.length * (1.0 + slack) && theta >= self.theta0 - slack && theta <= math::FRAC_PI_2 + slack
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Truncation {
    pub m_max: usize,
    pub n_max: usize,
}

impl Truncation {
    pub fn new(m_max: usize, n_max: usize) -> Result<Self, SpectralError> {
        if m_max < 1 || n_max < 1 {
            return Err(SpectralError::InvalidTruncation);
        }
        Ok(Self { m_max, n_max })
    }

    pub fn doubled(&self) -> Self {
        Self { m_max: 2 * self.m_max, n_max: 2 * self.n_max }
    }

    /// Every mode key in assembly order: ascending m, then n, sin before cos.
    pub fn keys(&self) -> alloc::vec::Vec<ModeKey> {
        let mut keys = alloc::vec::Vec::with_capacity((self.m_max + 1) * (2 * self.n_max + 1));
        for m in 0..=self.m_max {
            keys.push(ModeKey { m, n: 0, parity: Parity::Cos });
            for n in 1..=self.n_max {
                keys.push(ModeKey { m, n, parity: Parity::Sin });
                keys.push(ModeKey { m, n, parity: Parity::Cos });
            }
        }
        keys
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Self { m_max: 16, n_max: 16 }
    }
}

/// Periodic factor: `Sin` is sin(n y₂) (parity 1), `Cos` is cos(n y₂) (parity 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Sin,
    Cos,
}

impl Parity {
    /// 1 for sin, 2 for cos.
    pub fn index(self) -> u8 {
        match self {
            Parity::Sin => 1,
            Parity::Cos => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeKey {
    pub m: usize,
    pub n: usize,
    pub parity: Parity,
}

impl fmt::Display for ModeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.m, self.n, self.parity.index())
    }
}

/// λ_n = n² and μ_m = (mπ/(π/2 − θ₀))².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    pub mu: f64,
}

pub fn eigenvalues(theta0: f64, m: usize, n: usize) -> Result<EigenPair, SpectralError> {
    if !(theta0 > 0.0 && theta0 < math::FRAC_PI_2) {
        return Err(SpectralError::InvalidAngle(theta0));
    }
    let root = m as f64 * math::PI / (math::FRAC_PI_2 - theta0);
    Ok(EigenPair { lambda: (n * n) as f64, mu: root * root })
}

/// Weighted-space exponents (δ, δ₀, α).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightExponents {
    delta: f64,
    delta0: f64,
    alpha: f64,
}

impl WeightExponents {
    pub fn new(domain: &WedgeDomain, delta: f64, delta0: f64, alpha: f64) -> Result<Self, SpectralError> {
        if !(delta > 0.0 && delta < domain.angular_order(1) - 1.0) {
            return Err(SpectralError::InvalidWeights("need 0 < δ < √μ₁ − 1"));
        }
        if !(delta0 > 0.0 && delta0 < 1.0) {
            return Err(SpectralError::InvalidWeights("need 0 < δ₀ < 1"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(SpectralError::InvalidWeights("need 0 < α < 1"));
        }
        Ok(Self { delta, delta0, alpha })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_at_quarter_pi() {
        let q = math::PI / 4.0;
        assert!((eigenvalues(q, 1, 0).unwrap().mu - 16.0).abs() < 1e-12);
        assert!((eigenvalues(q, 2, 3).unwrap().mu - 64.0).abs() < 1e-12);
        assert_eq!(eigenvalues(q, 2, 3).unwrap().lambda, 9.0);
        assert_eq!(eigenvalues(0.3, 0, 1).unwrap().mu, 0.0);
        assert!(eigenvalues(0.0, 1, 1).is_err());
    }

    #[test]
    fn domain_and_weights_validation() {
        assert!(WedgeDomain::new(0.5, 3.9).is_err());
        assert!(WedgeDomain::new(1.6, 8.0).is_err());
        let d = WedgeDomain::new(math::PI / 4.0, 8.0).unwrap();
        assert!((d.angular_order(1) - 4.0).abs() < 1e-14);
        assert!(WeightExponents::new(&d, 2.9, 0.5, 0.5).is_ok());
        assert!(WeightExponents::new(&d, 3.1, 0.5, 0.5).is_err());
        assert!(WeightExponents::new(&d, 0.3, 1.0, 0.5).is_err());
        assert!(Truncation::new(0, 3).is_err());
    }

    #[test]
    fn key_order_is_ascending() {
        let keys = Truncation::new(2, 3).unwrap().keys();
        assert_eq!(keys.len(), 3 * 7);
        assert!(keys.windows(2).all(|w| (w[0].m, w[0].n, w[0].parity) < (w[1].m, w[1].n, w[1].parity)));
    }
}
