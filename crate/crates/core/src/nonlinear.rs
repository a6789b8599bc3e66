//! Hodograph-frame coefficient fields, boundary operators and the fixed-point
//! iteration that drives them with the wedge spectral solver.
//!
//! Physical points are x, hodograph points y. The frame is
//! y₁ = Φ/q₀, y₂ = x₂, y₃ = b₀Φ/q₀ + x₃ − b₀x₁ with Φ = φ⁻ − φ⁺, so the shock
//! sits on y₁ = 0 and the ramp on y₃ = b₀y₁. The unknown u(y) is the physical
//! x₁ of the point labelled y. Cylindrical coordinates follow the spectral
//! module: y₁ = r cos θ, y₃ = r sin θ, θ ∈ [θ₀, π/2].

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::norms::{self, CartesianJet, Field, NormError, NormSpec, PlanSpec, SamplePlan};
use crate::par;
use crate::quad::{lagrange_basis_derivatives, GaussRule};
use crate::shockstate::{solve_background, BackgroundState, GasParams, ShockError, UpstreamState, WedgeGeometry};
use crate::spectral::{
    assemble, project_slab, solve_modes, table_from_projections, AngularRule, CutoffOptions, FieldSample, Jet,
    ModeKey, Parity, RadialGrid, RadialSample, SeriesSolution, SpectralError, Truncation, WedgeDomain,
    WeightExponents,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NonlinearError {
    #[error(transparent)]
    Shock(#[from] ShockError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error("enthalpy argument {0} is not positive (vacuum)")]
    Vacuum(f64),
    #[error("hodograph map degenerates: Jacobian ∂₁u + b₀∂₃u = {0}")]
    DegenerateMap(f64),
    #[error("incoming flow is not supersonic at x = {x:?}: ∂₁φ⁻ = {speed}, c⁻ = {sound}")]
    NotSupersonic { x: [f64; 3], speed: f64, sound: f64 },
    #[error("entropy condition fails at y = {y:?}: ρ₊ = {rho_plus} ≤ ρ₋ = {rho_minus}")]
    EntropyViolation { y: [f64; 3], rho_minus: f64, rho_plus: f64 },
    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(&'static str),
    #[error("invalid iteration settings: {0}")]
    InvalidSettings(&'static str),
    #[error("non-finite value at y = {0:?}")]
    NonFinite([f64; 3]),
    #[error("no convergence after {} steps (last update {:e})", .updates.len(), .updates.last().copied().unwrap_or(f64::NAN))]
    NoConvergence { updates: Vec<f64> },
}

/// ρ = h⁻¹(C₀ − ½|∇φ|²).
pub fn density_from_gradient(gas: &GasParams, c0: f64, gradient: [f64; 3]) -> Result<f64, NonlinearError> {
    let argument = c0 - 0.5 * dot(&gradient, &gradient);
    if !(argument > 0.0) {
        return Err(NonlinearError::Vacuum(argument));
    }
    Ok(gas.inverse_enthalpy(argument)?)
}

/// Value, gradient and Hessian of a potential in x.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PotentialJet {
    pub value: f64,
    pub gradient: [f64; 3],
    pub hessian: [[f64; 3]; 3],
}

/// Smooth perturbation potential ψ(x), 2π-periodic in x₂ and supported in
/// 0 < x₃ < `support`. The x₁ factor is the Gaussian exp(−(x₁/taper)²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    /// bump(x₃)·cos(k x₂ + phase)·taper(x₁).
    Wave { support: f64, taper: f64, wavenumber: u32, phase: f64 },
    /// bump(x₃)·taper(x₁), independent of x₂.
    Planar { support: f64, taper: f64 },
}

impl Perturbation {
    fn validate(&self) -> Result<(), NonlinearError> {
        let (support, taper) = match *self {
            Perturbation::Wave { support, taper, phase, .. } => {
                if !phase.is_finite() {
                    return Err(NonlinearError::InvalidPerturbation("phase must be finite"));
                }
                (support, taper)
            }
            Perturbation::Planar { support, taper } => (support, taper),
        };
        if !(support > 0.0 && support.is_finite()) {
            return Err(NonlinearError::InvalidPerturbation("support must be positive"));
        }
        if !(taper > 0.0 && taper.is_finite()) {
            return Err(NonlinearError::InvalidPerturbation("taper width must be positive"));
        }
        Ok(())
    }

    pub fn support(&self) -> f64 {
        match *self {
            Perturbation::Wave { support, .. } | Perturbation::Planar { support, .. } => support,
        }
    }

    pub fn jet(&self, x: [f64; 3]) -> PotentialJet {
        let (support, taper) = match *self {
            Perturbation::Wave { support, taper, .. } | Perturbation::Planar { support, taper } => (support, taper),
        };
        let b = bump(x[2] / support);
        if b[0] == 0.0 {
            return PotentialJet::default();
        }
        let f3 = [b[0], b[1] / support, b[2] / (support * support)];
        let s = x[0] / taper;
        let g = math::exp(-s * s);
        let w2 = taper * taper;
        let f1 = [g, -2.0 * x[0] / w2 * g, (4.0 * x[0] * x[0] / (w2 * w2) - 2.0 / w2) * g];
        let f2 = match *self {
            Perturbation::Wave { wavenumber, phase, .. } => {
                let k = f64::from(wavenumber);
                let (c, sn) = (math::cos(k * x[1] + phase), math::sin(k * x[1] + phase));
                [c, -k * sn, -k * k * c]
            }
            Perturbation::Planar { .. } => [1.0, 0.0, 0.0],
        };
        let factors = [f1, f2, f3];
        let mut out = PotentialJet { value: f1[0] * f2[0] * f3[0], ..PotentialJet::default() };
        // ∂ of a product of one-variable factors: differentiate the factors named by the index multiset.
        let partial = |orders: [usize; 3]| factors[0][orders[0]] * factors[1][orders[1]] * factors[2][orders[2]];
        for i in 0..3 {
            let mut o = [0; 3];
            o[i] = 1;
            out.gradient[i] = partial(o);
            for j in i..3 {
                let mut o = [0; 3];
                o[i] += 1;
                o[j] += 1;
                out.hessian[i][j] = partial(o);
                out.hessian[j][i] = out.hessian[i][j];
            }
        }
        out
    }
}

/// C^∞ bump e^{4 − 1/(s(1−s))} on (0, 1), peak 1 at s = ½, with two derivatives.
fn bump(s: f64) -> [f64; 3] {
    if !(s > 0.0 && s < 1.0) {
        return [0.0; 3];
    }
    let t = s * (1.0 - s);
    let dt = 1.0 - 2.0 * s;
    let e = math::exp(4.0 - 1.0 / t);
    let de = dt / (t * t);
    let d2e = -2.0 / (t * t) - 2.0 * dt * dt / (t * t * t);
    [e, e * de, e * (d2e + de * de)]
}

/// Upstream potential φ⁻ = q₀x₁ + εψ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncomingFlow {
    pub q0: f64,
    pub epsilon: f64,
    pub psi: Perturbation,
}

impl IncomingFlow {
    pub fn new(q0: f64, epsilon: f64, psi: Perturbation) -> Result<Self, NonlinearError> {
        psi.validate()?;
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(NonlinearError::InvalidPerturbation("epsilon must be non-negative"));
        }
        if !(q0 > 0.0 && q0.is_finite()) {
            return Err(NonlinearError::InvalidPerturbation("upstream speed must be positive"));
        }
        Ok(Self { q0, epsilon, psi })
    }

    pub fn jet(&self, x: [f64; 3]) -> PotentialJet {
        let psi = self.psi.jet(x);
        let mut out = PotentialJet {
            value: self.q0 * x[0] + self.epsilon * psi.value,
            gradient: psi.gradient.map(|g| self.epsilon * g),
            hessian: psi.hessian.map(|row| row.map(|h| self.epsilon * h)),
        };
        out.gradient[0] += self.q0;
        out
    }

    /// Smallest ∂₁φ⁻ − c⁻ over a lattice on [0, extent] × [0, 2π) × [0, support].
    pub fn supersonic_margin(&self, gas: &GasParams, c0: f64, extent: f64) -> Result<f64, NonlinearError> {
        let support = self.psi.support();
        let mut margin = f64::INFINITY;
        for i in 0..=48 {
            for j in 0..16 {
                for k in 0..=24 {
                    let x = [extent * i as f64 / 48.0, math::TAU * j as f64 / 16.0, support * k as f64 / 24.0];
                    let grad = self.jet(x).gradient;
                    let sound = gas.sound_speed(density_from_gradient(gas, c0, grad)?)?;
                    if !(grad[0] > sound) {
                        return Err(NonlinearError::NotSupersonic { x, speed: grad[0], sound });
                    }
                    margin = margin.min(grad[0] - sound);
                }
            }
        }
        Ok(margin)
    }
}

/// The partial hodograph transformation and its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HodographMap {
    pub q0: f64,
    pub b0: f64,
}

impl HodographMap {
    /// y from x and the value of Φ at x.
    pub fn forward(&self, x: [f64; 3], jump: f64) -> [f64; 3] {
        let y1 = jump / self.q0;
        [y1, x[1], self.b0 * y1 + x[2] - self.b0 * x[0]]
    }

    /// x from y and the value of u at y.
    pub fn inverse(&self, y: [f64; 3], u: f64) -> [f64; 3] {
        [u, y[1], y[2] - self.b0 * y[0] + self.b0 * u]
    }
}

/// The affine background u₀ = slope_y1·y₁ + slope_y3·y₃ and its potential jump.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundProfile {
    pub slope_y1: f64,
    pub slope_y3: f64,
    pub state: BackgroundState,
    pub q0: f64,
    pub b0: f64,
}

impl BackgroundProfile {
    pub fn value(&self, y: [f64; 3]) -> f64 {
        self.slope_y1 * y[0] + self.slope_y3 * y[2]
    }

    pub fn gradient(&self) -> [f64; 3] {
        [self.slope_y1, 0.0, self.slope_y3]
    }

    pub fn jet(&self, y: [f64; 3]) -> CartesianJet {
        CartesianJet { value: self.value(y), gradient: self.gradient(), hessian: [[0.0; 3]; 3] }
    }

    /// Φ₀(x) = (q₀ − u₁⁺)x₁ − u₃⁺x₃.
    pub fn potential_jump(&self, x: [f64; 3]) -> f64 {
        (self.q0 - self.state.u1_plus) * x[0] - self.state.u3_plus * x[2]
    }
}

/// Invert Φ₀ through the hodograph map in closed form.
pub fn background_u0(state: &BackgroundState, q0: f64, b0: f64) -> Result<BackgroundProfile, NonlinearError> {
    let denom = (q0 - state.u1_plus) - b0 * state.u3_plus;
    if !(math::abs(denom) > 1e-12 * q0) || !denom.is_finite() {
        return Err(NonlinearError::DegenerateMap(denom));
    }
    Ok(BackgroundProfile {
        slope_y1: (q0 - b0 * state.u3_plus) / denom,
        slope_y3: state.u3_plus / denom,
        state: state.clone(),
        q0,
        b0,
    })
}

/// Coefficients at one point: the physical a_ij, the transformed A_ij and the
/// downstream state behind them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientField {
    pub a: [[f64; 3]; 3],
    pub transformed: [[f64; 3]; 3],
    pub rho_plus: f64,
    pub sound_sq_plus: f64,
    /// ∂₁u + b₀∂₃u.
    pub jacobian: f64,
    pub jump_gradient: [f64; 3],
}

/// ∇ₓΦ = q₀(1 + b₀u₃, −u₂, −u₃)/(u₁ + b₀u₃) for ∇u = (u₁, u₂, u₃).
pub fn jump_gradient(q0: f64, b0: f64, grad_u: [f64; 3]) -> Result<[f64; 3], NonlinearError> {
    let jac = grad_u[0] + b0 * grad_u[2];
    if !(jac > 0.0) {
        return Err(NonlinearError::DegenerateMap(jac));
    }
    let s = q0 / jac;
    Ok([s * (1.0 + b0 * grad_u[2]), -s * grad_u[1], -s * grad_u[2]])
}

/// a_ii = 1 − (∂_iφ)²/c², a_ij = −∂_iφ∂_jφ/c².
pub fn physical_coefficients(grad_phi: [f64; 3], sound_sq: f64) -> [[f64; 3]; 3] {
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = -grad_phi[i] * grad_phi[j] / sound_sq;
        }
        a[i][i] += 1.0;
    }
    a
}

/// Rows of ∂y/∂x: the transformed coefficients are M a Mᵀ/D.
fn inverse_jacobian_rows(b0: f64, grad_u: [f64; 3]) -> ([[f64; 3]; 3], f64) {
    let [u1, u2, u3] = grad_u;
    let jac = u1 + b0 * u3;
    (
        [
            [(1.0 + b0 * u3) / jac, -u2 / jac, -u3 / jac],
            [0.0, 1.0, 0.0],
            [b0 * (1.0 - u1) / jac, -b0 * u2 / jac, u1 / jac],
        ],
        jac,
    )
}

/// A = M a Mᵀ/D by the chain rule through the inverse map.
pub fn transformed_coefficients(a: &[[f64; 3]; 3], b0: f64, grad_u: [f64; 3]) -> [[f64; 3]; 3] {
    let (m, jac) = inverse_jacobian_rows(b0, grad_u);
    let mut out = [[0.0; 3]; 3];
    for c in 0..3 {
        for d in c..3 {
            let mut acc = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    acc += m[c][k] * a[k][l] * m[d][l];
                }
            }
            out[c][d] = acc / jac;
            out[d][c] = out[c][d];
        }
    }
    out
}

/// The A_ij block written term by term as listed. Its A₁₃ carries
/// −a₂₃u₂(u₁ + b₀u₃), where the chain rule gives −a₂₃u₂(u₁ − b₀u₃).
pub fn printed_coefficients(a: &[[f64; 3]; 3], b0: f64, grad_u: [f64; 3]) -> [[f64; 3]; 3] {
    let [u1, u2, u3] = grad_u;
    let d = u1 + b0 * u3;
    let (d2, d3) = (d * d, d * d * d);
    let (a11, a22, a33, a12, a13, a23) = (a[0][0], a[1][1], a[2][2], a[0][1], a[0][2], a[1][2]);
    let e = 1.0 + b0 * u3;
    let f = 1.0 - u1;
    let b2 = b0 * b0;
    let c11 = (a11 * e * e + a22 * u2 * u2 + a33 * u3 * u3 - 2.0 * a12 * u2 * e - 2.0 * a13 * u3 * e
        + 2.0 * a23 * u2 * u3)
        / d3;
    let c22 = a22 / d;
    let c33 = (a11 * b2 * f * f + a22 * b2 * u2 * u2 + a33 * u1 * u1 - 2.0 * a12 * b2 * u2 * f
        + 2.0 * a13 * b0 * u1 * f
        - 2.0 * a23 * b0 * u1 * u2)
        / d3;
    let c12 = (-a22 * u2 + a12 * e - a23 * u3) / d2;
    let c13 = (a11 * b0 * e * f + a22 * b0 * u2 * u2 - a33 * u1 * u3 + a12 * b0 * u2 * (u1 - b0 * u3 - 2.0)
        + a13 * (u1 + 2.0 * b0 * u1 * u3 - b0 * u3)
        - a23 * u2 * (u1 + b0 * u3))
        / d3;
    let c23 = (-a22 * b0 * u2 + a12 * b0 * f + a23 * u1) / d2;
    [[c11, c12, c13], [c12, c22, c23], [c13, c23, c33]]
}

/// Smallest eigenvalue of a symmetric 3×3 matrix (trigonometric closed form).
pub fn min_eigenvalue(m: &[[f64; 3]; 3]) -> f64 {
    let off = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let (d0, d1, d2) = (m[0][0] - q, m[1][1] - q, m[2][2] - q);
    let spread = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * off;
    if spread <= 0.0 {
        return q;
    }
    let p = math::sqrt(spread / 6.0);
    let mut b = *m;
    for (i, row) in b.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (*v - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let phi = math::acos((det / 2.0).clamp(-1.0, 1.0)) / 3.0;
    q + 2.0 * p * math::cos(phi + 2.0 * math::PI / 3.0)
}

/// G₁ from ∇φ⁻ at the mapped point and ∇u.
pub fn ramp_expression(q0: f64, b0: f64, grad_phi_minus: [f64; 3], grad_u: [f64; 3]) -> f64 {
    let p = grad_phi_minus;
    let w = p[2] - b0 * p[0];
    -(1.0 + b0 * b0 + b0 / q0 * w) * grad_u[2] - w / q0 * grad_u[0] - b0
}

/// G₂ from ∇φ⁻ at the mapped point, ∇u and the density ratio ρ₋/ρ₊.
pub fn shock_expression(q0: f64, b0: f64, grad_phi_minus: [f64; 3], grad_u: [f64; 3], density_ratio: f64) -> f64 {
    let p = grad_phi_minus;
    let k = (1.0 - density_ratio) / q0;
    let [u1, u2, u3] = grad_u;
    k * p[0] * u1 + b0 * (k * p[0] - 2.0) * u3 + b0 * k * p[0] * u1 * u3 - u2 * u2
        + (b0 * k * (b0 * p[0] - p[2]) - (1.0 + b0 * b0)) * u3 * u3
        - k * p[1] * u1 * u2
        - b0 * k * p[1] * u2 * u3
        - k * p[2] * u1 * u3
        - 1.0
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Gas, background, incoming flow and the normalisations of the three operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub gas: GasParams,
    pub upstream: UpstreamState,
    pub geometry: WedgeGeometry,
    pub flow: IncomingFlow,
    pub background: BackgroundProfile,
    pub map: HodographMap,
    interior_scale: f64,
    shock_scale: f64,
}

/// One point of the interior operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorSample {
    /// Σ A_cd ∂_cd u + (1/q₀)Σ a_kl ∂_kl φ⁻.
    pub residual: f64,
    pub coefficients: CoefficientField,
}

impl Problem {
    pub fn new(gas: GasParams, b0: f64, flow: IncomingFlow) -> Result<Self, NonlinearError> {
        let q0 = flow.q0;
        let upstream = UpstreamState::new(&gas, q0)?;
        let geometry = WedgeGeometry::new(b0)?;
        let state = solve_background(&gas, q0, &geometry)?;
        let background = background_u0(&state, q0, b0)?;
        let mut problem = Self {
            gas,
            upstream,
            geometry,
            flow,
            background,
            map: HodographMap { q0, b0 },
            interior_scale: 1.0,
            shock_scale: 1.0,
        };
        // Leading coefficients at u₀ with ε = 0.
        let unperturbed = [q0, 0.0, 0.0];
        let grad = problem.background.gradient();
        let coeff = problem.coefficients(grad, unperturbed)?;
        problem.interior_scale = (coeff.transformed[0][0] + coeff.transformed[1][1] + coeff.transformed[2][2]) / 3.0;
        let rho_minus = density_from_gradient(&gas, upstream.bernoulli_c0, unperturbed)?;
        problem.shock_scale = 1.0 - rho_minus / coeff.rho_plus;
        Ok(problem)
    }

    pub fn b0(&self) -> f64 {
        self.geometry.b0
    }

    pub fn q0(&self) -> f64 {
        self.flow.q0
    }

    /// Trace/3 of A at the unperturbed background.
    pub fn interior_scale(&self) -> f64 {
        self.interior_scale
    }

    /// 1 − ρ₋/ρ₊ at the unperturbed background: the ∂_{y₁}u coefficient of G₂.
    pub fn shock_scale(&self) -> f64 {
        self.shock_scale
    }

    /// φ⁻ at the physical point labelled y when u(y) = `u`.
    pub fn upstream_at(&self, y: [f64; 3], u: f64) -> PotentialJet {
        self.flow.jet(self.map.inverse(y, u))
    }

    pub fn coefficients(&self, grad_u: [f64; 3], grad_phi_minus: [f64; 3]) -> Result<CoefficientField, NonlinearError> {
        let jump = jump_gradient(self.q0(), self.b0(), grad_u)?;
        let plus = [grad_phi_minus[0] - jump[0], grad_phi_minus[1] - jump[1], grad_phi_minus[2] - jump[2]];
        let rho_plus = density_from_gradient(&self.gas, self.upstream.bernoulli_c0, plus)?;
        let sound_sq_plus = self.gas.sound_speed_sq(rho_plus)?;
        let a = physical_coefficients(plus, sound_sq_plus);
        Ok(CoefficientField {
            a,
            transformed: transformed_coefficients(&a, self.b0(), grad_u),
            rho_plus,
            sound_sq_plus,
            jacobian: grad_u[0] + self.b0() * grad_u[2],
            jump_gradient: jump,
        })
    }

    pub fn interior_operator(&self, y: [f64; 3], u: &CartesianJet) -> Result<InteriorSample, NonlinearError> {
        let phi = self.upstream_at(y, u.value);
        let coefficients = self.coefficients(u.gradient, phi.gradient)?;
        let mut residual = 0.0;
        for c in 0..3 {
            for d in 0..3 {
                residual += coefficients.transformed[c][d] * u.hessian[c][d]
                    + coefficients.a[c][d] * phi.hessian[c][d] / self.q0();
            }
        }
        if !residual.is_finite() {
            return Err(NonlinearError::NonFinite(y));
        }
        Ok(InteriorSample { residual, coefficients })
    }

    /// The ramp operator G₁(u, ∇u) as listed.
    pub fn boundary_g1(&self, y: [f64; 3], u: &CartesianJet) -> f64 {
        let p = self.upstream_at(y, u.value).gradient;
        ramp_expression(self.q0(), self.b0(), p, u.gradient)
    }

    /// The shock operator G₂(u, ∇u) as listed, with ρ₊ from the iterate.
    pub fn boundary_g2(&self, y: [f64; 3], u: &CartesianJet) -> Result<f64, NonlinearError> {
        let (q0, b0) = (self.q0(), self.b0());
        let p = self.upstream_at(y, u.value).gradient;
        let c0 = self.upstream.bernoulli_c0;
        let rho_minus = density_from_gradient(&self.gas, c0, p)?;
        let sound = self.gas.sound_speed(rho_minus)?;
        if !(p[0] > sound) {
            return Err(NonlinearError::NotSupersonic { x: self.map.inverse(y, u.value), speed: p[0], sound });
        }
        let jump = jump_gradient(q0, b0, u.gradient)?;
        let plus = [p[0] - jump[0], p[1] - jump[1], p[2] - jump[2]];
        let rho_plus = density_from_gradient(&self.gas, c0, plus)?;
        if !(rho_plus > rho_minus) {
            return Err(NonlinearError::EntropyViolation { y, rho_minus, rho_plus });
        }
        Ok(shock_expression(q0, b0, p, u.gradient, rho_minus / rho_plus))
    }

    /// G₁ scaled so its linear part at u₀, ε = 0 is the outward normal derivative.
    pub fn normalized_g1(&self, y: [f64; 3], u: &CartesianJet) -> f64 {
        math::cos(self.geometry.theta0) * self.boundary_g1(y, u)
    }

    /// −G₂/(1 − ρ₋/ρ₊), whose linear part is −∂_{y₁}u, the outward normal derivative.
    pub fn normalized_g2(&self, y: [f64; 3], u: &CartesianJet) -> Result<f64, NonlinearError> {
        Ok(-self.boundary_g2(y, u)? / self.shock_scale)
    }
}

/// Knobs of the fixed-point iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationSettings {
    pub truncation: Truncation,
    /// Radius of the working domain.
    pub cut_radius: f64,
    /// (δ, δ₀, α) for the trust-region norm of v − u₀.
    pub weights: (f64, f64, f64),
    pub max_steps: usize,
    /// Stop once the update is at most this times sup|u₀|.
    pub relative_tolerance: f64,
    /// The pin u(0, y₂*, 0) = 0 sits at this y₂*.
    pub pin_y2: f64,
    pub solver: CutoffOptions,
    pub edge_samples: usize,
    /// Points and pairs of the trust-region sample plan.
    pub trust_points: usize,
    pub trust_pairs: usize,
    pub seed: u64,
}

impl Default for IterationSettings {
    fn default() -> Self {
        Self {
            truncation: Truncation { m_max: 12, n_max: 12 },
            cut_radius: 32.0,
            weights: (0.5, 0.5, 0.5),
            max_steps: 25,
            relative_tolerance: 1e-8,
            pin_y2: 0.0,
            solver: CutoffOptions::default(),
            edge_samples: 64,
            trust_points: 200,
            trust_pairs: 400,
            seed: 0,
        }
    }
}

/// Grid, rule and norms shared by every step.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub domain: WedgeDomain,
    pub settings: IterationSettings,
    pub grid: RadialGrid,
    pub rule: AngularRule,
    weights: WeightExponents,
    reference: Vec<f64>,
    /// sup|u₀| over the tensor grid.
    pub u0_norm: f64,
    pub supersonic_margin: f64,
}

impl Workspace {
    pub fn new(problem: &Problem, settings: IterationSettings) -> Result<Self, NonlinearError> {
        if !(settings.relative_tolerance > 0.0) || settings.max_steps == 0 {
            return Err(NonlinearError::InvalidSettings("tolerance and step budget must be positive"));
        }
        if settings.edge_samples < 2 || settings.trust_points == 0 {
            return Err(NonlinearError::InvalidSettings("sample counts too small"));
        }
        let domain = WedgeDomain::new(problem.geometry.theta0, settings.cut_radius)?;
        let (delta, delta0, alpha) = settings.weights;
        let weights = WeightExponents::new(&domain, delta, delta0, alpha)?;
        let grid = settings.solver.radial_grid(&domain, &settings.truncation)?;
        let rule = settings.solver.angular_rule(&domain, &settings.truncation);
        let reference = GaussRule::legendre(grid.order()).nodes;
        let mut u0_norm: f64 = 0.0;
        for &r in grid.nodes() {
            for &t in &rule.thetas {
                let y = norms::to_cartesian(r, t, 0.0);
                u0_norm = u0_norm.max(math::abs(problem.background.value(y)));
            }
        }
        let supersonic_margin =
            problem.flow.supersonic_margin(&problem.gas, problem.upstream.bernoulli_c0, 2.0 * settings.cut_radius)?;
        Ok(Self { domain, settings, grid, rule, weights, reference, u0_norm, supersonic_margin })
    }

    pub fn weights(&self) -> WeightExponents {
        self.weights
    }

    fn radial_weights(&self, r: f64) -> RadialWeights {
        let panel = self.grid.locate(r);
        let (a, b) = self.grid.panel(panel);
        let scale = 2.0 / (b - a);
        let value = self.grid.basis(panel, r);
        let (d1, d2) = lagrange_basis_derivatives(&self.reference, (2.0 * r - a - b) / (b - a));
        RadialWeights {
            panel,
            value,
            d1: d1.iter().map(|w| w * scale).collect(),
            d2: d2.iter().map(|w| w * scale * scale).collect(),
        }
    }
}

struct RadialWeights {
    panel: usize,
    value: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

/// Trigonometric basis for `count` equispaced samples: slots are
/// 1, cos y, sin y, cos 2y, sin 2y, …, and cos(count/2·y) when count is even.
fn trig_slots(count: usize, y: f64) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(count);
    out.push([1.0, 0.0, 0.0]);
    let mut k = 1;
    while out.len() < count {
        let kf = k as f64;
        let (c, s) = (math::cos(kf * y), math::sin(kf * y));
        out.push([c, -kf * s, -kf * kf * c]);
        if out.len() < count {
            out.push([s, kf * c, -kf * kf * s]);
        }
        k += 1;
    }
    out
}

fn trig_normalization(count: usize, slot: usize) -> f64 {
    let nyquist = count % 2 == 0 && slot == count - 1;
    if slot == 0 || nyquist {
        1.0 / count as f64
    } else {
        2.0 / count as f64
    }
}

/// Neumann datum on one ray, sampled on grid nodes × equispaced y₂ and
/// interpolated panel-wise in r and trigonometrically in y₂.
#[derive(Debug, Clone, PartialEq)]
struct RayData {
    ny: usize,
    /// Trigonometric coefficients, [node][slot].
    coeffs: Vec<f64>,
}

impl RayData {
    fn new(ny: usize, values: &[f64], table: &[Vec<[f64; 3]>]) -> Self {
        let nodes = values.len() / ny;
        let mut coeffs = vec![0.0; nodes * ny];
        for k in 0..nodes {
            let row = &values[k * ny..(k + 1) * ny];
            for slot in 0..ny {
                let mut acc = 0.0;
                for (b, v) in row.iter().enumerate() {
                    acc += v * table[b][slot][0];
                }
                coeffs[k * ny + slot] = acc * trig_normalization(ny, slot);
            }
        }
        Self { ny, coeffs }
    }

    /// (g, g_r, g_rr) coefficient triples at one radius.
    fn profile(&self, grid: &RadialGrid, w: &RadialWeights) -> Vec<[f64; 3]> {
        let mut out = vec![[0.0; 3]; self.ny];
        for (i, node) in grid.panel_nodes(w.panel).enumerate() {
            let row = &self.coeffs[node * self.ny..(node + 1) * self.ny];
            for (slot, c) in row.iter().enumerate() {
                out[slot][0] += w.value[i] * c;
                out[slot][1] += w.d1[i] * c;
                out[slot][2] += w.d2[i] * c;
            }
        }
        out
    }

    fn jet(profile: &[[f64; 3]], trig: &[[f64; 3]]) -> Jet {
        let mut j = Jet::default();
        for (p, t) in profile.iter().zip(trig) {
            j.value += p[0] * t[0];
            j.d_r += p[1] * t[0];
            j.d_rr += p[2] * t[0];
            j.d_y += p[0] * t[1];
            j.d_ry += p[1] * t[1];
            j.d_yy += p[0] * t[2];
        }
        j
    }
}

/// h = r(g₁φ₁(θ) + g₂φ₂(θ)) with φ₁ = (θ−θ₀)²/(2Θ) − θ, φ₂ = (θ−θ₀)²/(2Θ),
/// so −∂_θh = r g₁ at θ₀ and ∂_θh = r g₂ at π/2.
fn lift_sample(domain: &WedgeDomain, lower: &Jet, upper: &Jet, r: f64, theta: f64) -> FieldSample {
    let width = domain.aperture();
    let s = theta - domain.theta0();
    let quad = s * s / (2.0 * width);
    let (p1, p2, dp1, dp2) = (quad - theta, quad, s / width - 1.0, s / width);
    let mix = |f: fn(&Jet) -> f64| f(lower) * p1 + f(upper) * p2;
    let mix_t = |f: fn(&Jet) -> f64| f(lower) * dp1 + f(upper) * dp2;
    let g = mix(|j| j.value);
    let g_r = mix(|j| j.d_r);
    let g_rr = mix(|j| j.d_rr);
    let g_y = mix(|j| j.d_y);
    let g_ry = mix(|j| j.d_ry);
    let g_yy = mix(|j| j.d_yy);
    let g_t = mix_t(|j| j.value);
    let g_rt = mix_t(|j| j.d_r);
    let g_ty = mix_t(|j| j.d_y);
    let g_tt = (lower.value + upper.value) / width;
    FieldSample {
        value: r * g,
        gradient: [g + r * g_r, r * g_t, r * g_y],
        hessian: [
            [2.0 * g_r + r * g_rr, g_t + r * g_rt, g_y + r * g_ry],
            [g_t + r * g_rt, r * g_tt, r * g_ty],
            [g_y + r * g_ry, r * g_ty, r * g_yy],
        ],
    }
}

fn add_samples(a: &mut FieldSample, b: &FieldSample) {
    a.value += b.value;
    for i in 0..3 {
        a.gradient[i] += b.gradient[i];
        for j in 0..3 {
            a.hessian[i][j] += b.hessian[i][j];
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Correction {
    series: SeriesSolution,
    lower: RayData,
    upper: RayData,
    /// Constant added so the pin holds at y₂*.
    offset: f64,
}

/// An iterate u = u₀ + u̇, with u̇ = (series) + (Neumann lift) + constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    correction: Option<Correction>,
}

impl Iterate {
    pub fn background() -> Self {
        Self { correction: None }
    }

    pub fn is_background(&self) -> bool {
        self.correction.is_none()
    }

    pub fn series(&self) -> Option<&SeriesSolution> {
        self.correction.as_ref().map(|c| &c.series)
    }

    /// u̇ at (r, θ, y₂) with derivatives in (r, θ, y₂) up to `order`.
    pub fn correction_sample(
        &self,
        ws: &Workspace,
        r: f64,
        theta: f64,
        y2: f64,
        order: u8,
    ) -> Result<FieldSample, NonlinearError> {
        let Some(c) = &self.correction else {
            if !ws.domain.contains(r, theta) {
                return Err(SpectralError::OutOfDomain { r, theta }.into());
            }
            return Ok(FieldSample::default());
        };
        let mut sample = assemble(&c.series, r, theta, y2, order)?;
        sample.value += c.offset;
        if r > 0.0 {
            let w = ws.radial_weights(r);
            let trig = trig_slots(c.lower.ny, y2);
            let lower = RayData::jet(&c.lower.profile(&ws.grid, &w), &trig);
            let upper = RayData::jet(&c.upper.profile(&ws.grid, &w), &trig);
            let mut lift = lift_sample(&ws.domain, &lower, &upper, r, theta);
            if order < 2 {
                lift.hessian = [[0.0; 3]; 3];
            }
            if order < 1 {
                lift.gradient = [0.0; 3];
            }
            add_samples(&mut sample, &lift);
        }
        Ok(sample)
    }

    /// u(0, y₂, 0); the background vanishes on the edge.
    pub fn edge_value(&self, ws: &Workspace, y2: f64) -> Result<f64, NonlinearError> {
        Ok(self.correction_sample(ws, 0.0, ws.domain.theta0(), y2, 0)?.value)
    }

    /// Full u with Cartesian derivatives at (r, θ, y₂), r > 0 unless order = 0.
    pub fn jet(&self, problem: &Problem, ws: &Workspace, r: f64, theta: f64, y2: f64, order: u8) -> Result<CartesianJet, NonlinearError> {
        let y = norms::to_cartesian(r, theta, y2);
        let sample = self.correction_sample(ws, r, theta, y2, order)?;
        let mut jet = if r > 0.0 {
            norms::cartesian_jet(&sample, r, theta)
        } else {
            CartesianJet { value: sample.value, ..CartesianJet::default() }
        };
        jet.value += problem.background.value(y);
        if order >= 1 {
            for (g, b) in jet.gradient.iter_mut().zip(problem.background.gradient()) {
                *g += b;
            }
        }
        Ok(jet)
    }
}

/// u̇ as a Cartesian field, for the trust-region norm.
struct CorrectionField<'a> {
    iterate: &'a Iterate,
    ws: &'a Workspace,
}

impl Field for CorrectionField<'_> {
    fn value(&self, x: [f64; 3]) -> f64 {
        self.jet(x, 0).value
    }

    fn jet(&self, x: [f64; 3], order: u8) -> CartesianJet {
        let r = norms::edge_distance(x);
        let theta = math::atan2(x[2], x[0]).clamp(self.ws.domain.theta0(), math::FRAC_PI_2);
        match self.iterate.correction_sample(self.ws, r, theta, x[1], order) {
            Ok(sample) if r > 0.0 => norms::cartesian_jet(&sample, r, theta),
            Ok(sample) => CartesianJet { value: sample.value, ..CartesianJet::default() },
            Err(_) => CartesianJet { value: f64::NAN, gradient: [f64::NAN; 3], hessian: [[f64::NAN; 3]; 3] },
        }
    }
}

/// Separable evaluation of a series on a tensor set of (θ, y₂).
struct SlabBasis {
    /// (cos, ∂_θ, ∂²_θ) of the angular factor, [m][θ index].
    angular: Vec<Vec<[f64; 3]>>,
    /// (T, T′, T″) of the periodic factor, [key index][y index].
    periodic: Vec<Vec<[f64; 3]>>,
    keys: Vec<ModeKey>,
    m_max: usize,
    ny: usize,
}

impl SlabBasis {
    fn new(domain: &WedgeDomain, trunc: &Truncation, thetas: &[f64], ys: &[f64]) -> Self {
        let angular = (0..=trunc.m_max)
            .map(|m| {
                let p = domain.angular_order(m);
                thetas
                    .iter()
                    .map(|t| {
                        let arg = p * (t - domain.theta0());
                        let (c, s) = (math::cos(arg), math::sin(arg));
                        [c, -p * s, -p * p * c]
                    })
                    .collect()
            })
            .collect();
        let keys = trunc.keys();
        let periodic = keys
            .iter()
            .map(|key| {
                let n = key.n as f64;
                ys.iter()
                    .map(|&y| {
                        let (c, s) = (math::cos(n * y), math::sin(n * y));
                        match key.parity {
                            Parity::Sin => [s, n * c, -n * n * s],
                            Parity::Cos => [c, -n * s, -n * n * c],
                        }
                    })
                    .collect()
            })
            .collect();
        Self { angular, periodic, keys, m_max: trunc.m_max, ny: ys.len() }
    }

    /// Add Σ R_key Φ_key into `out`, laid out [θ index][y index].
    fn accumulate(&self, samples: &[RadialSample], out: &mut [FieldSample], derivatives: bool) {
        let ny = self.ny;
        let mut stage = vec![[0.0f64; 6]; ny];
        let mut idx = 0;
        for m in 0..=self.m_max {
            stage.iter_mut().for_each(|s| *s = [0.0; 6]);
            while idx < self.keys.len() && self.keys[idx].m == m {
                let s = samples[idx];
                for (b, st) in stage.iter_mut().enumerate() {
                    let t = self.periodic[idx][b];
                    st[0] += s.value * t[0];
                    if derivatives {
                        st[1] += s.d1 * t[0];
                        st[2] += s.d2 * t[0];
                        st[3] += s.value * t[1];
                        st[4] += s.d1 * t[1];
                        st[5] += s.value * t[2];
                    }
                }
                idx += 1;
            }
            for (a, c) in self.angular[m].iter().enumerate() {
                for (b, st) in stage.iter().enumerate() {
                    let o = &mut out[a * ny + b];
                    o.value += st[0] * c[0];
                    if derivatives {
                        o.gradient[0] += st[1] * c[0];
                        o.gradient[1] += st[0] * c[1];
                        o.gradient[2] += st[3] * c[0];
                        o.hessian[0][0] += st[2] * c[0];
                        o.hessian[0][1] += st[1] * c[1];
                        o.hessian[0][2] += st[4] * c[0];
                        o.hessian[1][1] += st[0] * c[2];
                        o.hessian[1][2] += st[3] * c[1];
                        o.hessian[2][2] += st[5] * c[0];
                    }
                }
            }
        }
        if derivatives {
            for o in out.iter_mut() {
                o.hessian[1][0] = o.hessian[0][1];
                o.hessian[2][0] = o.hessian[0][2];
                o.hessian[2][1] = o.hessian[1][2];
            }
        }
    }
}

/// Sup-norm residuals of the three normalised operators at one iterate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OperatorResiduals {
    /// sup |N(u)|/(trace scale) over the tensor grid.
    pub pde: f64,
    /// sup of the normalised ramp defect over ray samples.
    pub bc1: f64,
    /// sup of the normalised shock defect over ray samples.
    pub bc2: f64,
    /// Smallest eigenvalue of A/(trace scale) over the tensor grid.
    pub ellipticity_margin: f64,
}

/// Result of one defect-correction step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next: Iterate,
    /// Residuals of the input iterate.
    pub residuals: OperatorResiduals,
    pub compat_constant: f64,
    pub energy_loss: f64,
}

struct NodeScratch {
    samples: Option<Vec<RadialSample>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    bc1: f64,
    bc2: f64,
}

fn evaluate_series(basis: &SlabBasis, samples: Option<&[RadialSample]>, len: usize, derivatives: bool) -> Vec<FieldSample> {
    let mut out = vec![FieldSample::default(); len];
    if let Some(s) = samples {
        basis.accumulate(s, &mut out, derivatives);
    }
    out
}

/// Solve Δu̇ = Δ(v − u₀) − N(v)/τ with Neumann data ∂ₙ(v − u₀) − Ĝ on the rays
/// and return u₀ + u̇, pinned at (0, y₂*, 0).
pub fn picard_step(problem: &Problem, ws: &Workspace, v: &Iterate) -> Result<StepOutcome, NonlinearError> {
    let domain = &ws.domain;
    let trunc = &ws.settings.truncation;
    let grid = &ws.grid;
    let rule = &ws.rule;
    let ny = rule.ys.len();
    let theta0 = domain.theta0();
    let rays = [theta0, math::FRAC_PI_2];
    let ray_basis = SlabBasis::new(domain, trunc, &rays, &rule.ys);
    let slab_basis = SlabBasis::new(domain, trunc, &rule.thetas, &rule.ys);
    let trig_table: Vec<Vec<[f64; 3]>> = rule.ys.iter().map(|&y| trig_slots(ny, y)).collect();
    let tau = problem.interior_scale();
    let correction = v.correction.as_ref();
    let old_jets = |w: &RadialWeights| -> (Vec<Jet>, Vec<Jet>) {
        match correction {
            Some(c) => {
                let (lo, hi) = (c.lower.profile(grid, w), c.upper.profile(grid, w));
                (
                    trig_table.iter().map(|t| RayData::jet(&lo, t)).collect(),
                    trig_table.iter().map(|t| RayData::jet(&hi, t)).collect(),
                )
            }
            None => (vec![Jet::default(); ny], vec![Jet::default(); ny]),
        }
    };
    let offset = correction.map_or(0.0, |c| c.offset);

    // Ray defects at every node.
    let scratch = par::map_slice(grid.nodes(), |&r| -> Result<NodeScratch, NonlinearError> {
        let samples = correction.map(|c| c.series.radial_samples(r)).transpose()?;
        let w = ws.radial_weights(r);
        let (old_lo, old_hi) = old_jets(&w);
        let mut series = evaluate_series(&ray_basis, samples.as_deref(), 2 * ny, true);
        let mut out = NodeScratch { samples, lower: vec![0.0; ny], upper: vec![0.0; ny], bc1: 0.0, bc2: 0.0 };
        for (a, &theta) in rays.iter().enumerate() {
            for b in 0..ny {
                let s = &mut series[a * ny + b];
                s.value += offset;
                add_samples(s, &lift_sample(domain, &old_lo[b], &old_hi[b], r, theta));
                let y = norms::to_cartesian(r, theta, rule.ys[b]);
                let mut jet = norms::cartesian_jet(s, r, theta);
                jet.value += problem.background.value(y);
                for (g, bg) in jet.gradient.iter_mut().zip(problem.background.gradient()) {
                    *g += bg;
                }
                if a == 0 {
                    let defect = problem.normalized_g1(y, &jet);
                    out.bc1 = out.bc1.max(math::abs(defect));
                    out.lower[b] = -s.gradient[1] / r - defect;
                } else {
                    let defect = problem.normalized_g2(y, &jet)?;
                    out.bc2 = out.bc2.max(math::abs(defect));
                    out.upper[b] = s.gradient[1] / r - defect;
                }
            }
        }
        Ok(out)
    });
    let scratch: Vec<NodeScratch> = scratch.into_iter().collect::<Result<_, _>>()?;
    let lower_values: Vec<f64> = scratch.iter().flat_map(|s| s.lower.iter().copied()).collect();
    let upper_values: Vec<f64> = scratch.iter().flat_map(|s| s.upper.iter().copied()).collect();
    let lower = RayData::new(ny, &lower_values, &trig_table);
    let upper = RayData::new(ny, &upper_values, &trig_table);

    // Interior defect minus the new lift's Laplacian, projected node by node.
    struct NodeResult {
        projection: crate::spectral::NodeProjection,
        pde: f64,
        margin: f64,
    }
    let slab_len = rule.slab_len();
    let projected = par::map_indexed(grid.nodes().len(), |k| -> Result<NodeResult, NonlinearError> {
        let r = grid.nodes()[k];
        let w = ws.radial_weights(r);
        let (old_lo, old_hi) = old_jets(&w);
        let (new_lo, new_hi) = {
            let (lo, hi) = (lower.profile(grid, &w), upper.profile(grid, &w));
            (
                trig_table.iter().map(|t| RayData::jet(&lo, t)).collect::<Vec<_>>(),
                trig_table.iter().map(|t| RayData::jet(&hi, t)).collect::<Vec<_>>(),
            )
        };
        let mut series = evaluate_series(&slab_basis, scratch[k].samples.as_deref(), slab_len, true);
        let mut slab = vec![0.0; slab_len];
        let (mut pde, mut margin) = (0.0f64, f64::INFINITY);
        for (a, &theta) in rule.thetas.iter().enumerate() {
            for b in 0..ny {
                let s = &mut series[a * ny + b];
                s.value += offset;
                add_samples(s, &lift_sample(domain, &old_lo[b], &old_hi[b], r, theta));
                let y = norms::to_cartesian(r, theta, rule.ys[b]);
                let mut jet = norms::cartesian_jet(s, r, theta);
                jet.value += problem.background.value(y);
                for (g, bg) in jet.gradient.iter_mut().zip(problem.background.gradient()) {
                    *g += bg;
                }
                let interior = problem.interior_operator(y, &jet)?;
                let normalized = interior.residual / tau;
                pde = pde.max(math::abs(normalized));
                let scaled = interior.coefficients.transformed.map(|row| row.map(|c| c / tau));
                margin = margin.min(min_eigenvalue(&scaled));
                let new_lift = lift_sample(domain, &new_lo[b], &new_hi[b], r, theta);
                let value = s.laplacian(r) - normalized - new_lift.laplacian(r);
                if !value.is_finite() {
                    return Err(NonlinearError::NonFinite(y));
                }
                slab[a * ny + b] = value;
            }
        }
        Ok(NodeResult { projection: project_slab(domain, trunc, rule, &slab), pde, margin })
    });
    let mut per_node = Vec::with_capacity(projected.len());
    let mut residuals = OperatorResiduals { ellipticity_margin: f64::INFINITY, ..OperatorResiduals::default() };
    for (node, s) in projected.into_iter().zip(&scratch) {
        let node = node?;
        residuals.pde = residuals.pde.max(node.pde);
        residuals.ellipticity_margin = residuals.ellipticity_margin.min(node.margin);
        residuals.bc1 = residuals.bc1.max(s.bc1);
        residuals.bc2 = residuals.bc2.max(s.bc2);
        per_node.push(node.projection);
    }
    let table = table_from_projections(domain, trunc, grid, per_node);
    let series = solve_modes(&table)?;
    let edge = assemble(&series, 0.0, theta0, ws.settings.pin_y2, 0)?.value;
    let next = Iterate { correction: Some(Correction { series, lower, upper, offset: -edge }) };
    Ok(StepOutcome { next, residuals, compat_constant: table.c_l, energy_loss: table.energy_loss })
}

/// sup |u̇_a − u̇_b| over the tensor grid.
pub fn update_norm(ws: &Workspace, a: &Iterate, b: &Iterate) -> Result<f64, NonlinearError> {
    let rule = &ws.rule;
    let ny = rule.ys.len();
    let basis = SlabBasis::new(&ws.domain, &ws.settings.truncation, &rule.thetas, &rule.ys);
    let trig_table: Vec<Vec<[f64; 3]>> = rule.ys.iter().map(|&y| trig_slots(ny, y)).collect();
    let values = |it: &Iterate, r: f64, w: &RadialWeights| -> Result<Vec<f64>, NonlinearError> {
        let Some(c) = &it.correction else {
            return Ok(vec![0.0; rule.slab_len()]);
        };
        let samples = c.series.radial_samples(r)?;
        let series = evaluate_series(&basis, Some(&samples), rule.slab_len(), false);
        let (lo, hi) = (c.lower.profile(&ws.grid, w), c.upper.profile(&ws.grid, w));
        let lo: Vec<Jet> = trig_table.iter().map(|t| RayData::jet(&lo, t)).collect();
        let hi: Vec<Jet> = trig_table.iter().map(|t| RayData::jet(&hi, t)).collect();
        let mut out = Vec::with_capacity(series.len());
        for (a, &theta) in rule.thetas.iter().enumerate() {
            for b in 0..ny {
                out.push(series[a * ny + b].value + c.offset + lift_sample(&ws.domain, &lo[b], &hi[b], r, theta).value);
            }
        }
        Ok(out)
    };
    let per_node = par::map_slice(ws.grid.nodes(), |&r| -> Result<f64, NonlinearError> {
        let w = ws.radial_weights(r);
        let (va, vb) = (values(a, r, &w)?, values(b, r, &w)?);
        Ok(va.iter().zip(&vb).fold(0.0f64, |m, (x, y)| m.max(math::abs(x - y))))
    });
    per_node.into_iter().try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

/// Weighted norm of u̇ at order ≤ 2 with edge exponent −1−δ and far exponent −δ₀.
pub fn trust_norm(ws: &Workspace, iterate: &Iterate) -> Result<f64, NonlinearError> {
    if iterate.is_background() {
        return Ok(0.0);
    }
    let w = ws.weights();
    let plan = SamplePlan::new(&PlanSpec {
        theta0: ws.domain.theta0(),
        r_min: 1e-4,
        r_max: ws.domain.length(),
        points: ws.settings.trust_points,
        pairs: ws.settings.trust_pairs,
        seed: ws.settings.seed,
    })?;
    let spec = NormSpec::full(2, w.alpha(), -1.0 - w.delta(), -w.delta0())?;
    Ok(norms::weighted_norm(&CorrectionField { iterate, ws }, &spec, &plan).total)
}

/// One row of the iteration history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub step: usize,
    pub update_norm: f64,
    pub contraction: Option<f64>,
    /// Residuals of the iterate produced by this step.
    pub residuals: OperatorResiduals,
    pub trust_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IterationWarning {
    /// ‖u_k − u₀‖ in the weighted norm exceeded ε.
    LeftTrustRegion { step: usize, norm: f64 },
    /// q₀^{−2/(γ−1)} above 0.05.
    SmallUpstreamSpeed { factor: f64 },
}

/// Final iterate with its history and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub iterate: Iterate,
    pub history: Vec<IterationRecord>,
    /// Residuals of the final iterate.
    pub residuals: OperatorResiduals,
    pub contraction_history: Vec<f64>,
    /// (y₂, u(0, y₂, 0)).
    pub edge_profile: Vec<(f64, f64)>,
    pub u0_norm: f64,
    pub tolerance: f64,
    /// sup |P(u) − u| for the final iterate u and the step map P.
    pub consistency_change: f64,
    pub warnings: Vec<IterationWarning>,
}

impl IterationState {
    pub fn steps(&self) -> usize {
        self.history.len()
    }

    pub fn max_edge(&self) -> f64 {
        self.edge_profile.iter().fold(0.0f64, |m, (_, e)| m.max(math::abs(*e)))
    }
}

/// u(0, y₂, 0) on `count` equispaced y₂.
pub fn edge_profile(ws: &Workspace, iterate: &Iterate, count: usize) -> Result<Vec<(f64, f64)>, NonlinearError> {
    (0..count)
        .map(|i| {
            let y2 = math::TAU * i as f64 / count as f64;
            Ok((y2, iterate.edge_value(ws, y2)?))
        })
        .collect()
}

/// Iterate the step map from u₀ until the update drops below the tolerance.
pub fn run_iteration(problem: &Problem, ws: &Workspace) -> Result<IterationState, NonlinearError> {
    let settings = &ws.settings;
    let tolerance = settings.relative_tolerance * ws.u0_norm;
    let mut warnings = Vec::new();
    let gamma = problem.gas.gamma();
    let factor = math::pow(problem.q0(), -2.0 / (gamma - 1.0));
    if factor > 0.05 {
        warnings.push(IterationWarning::SmallUpstreamSpeed { factor });
    }
    let mut current = Iterate::background();
    let mut outcome = picard_step(problem, ws, &current)?;
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut updates = Vec::new();
    for step in 1..=settings.max_steps {
        let next = outcome.next;
        let update = update_norm(ws, &next, &current)?;
        let contraction = updates.last().and_then(|&prev: &f64| (prev > 0.0).then(|| update / prev));
        updates.push(update);
        let trust = trust_norm(ws, &next)?;
        if trust > problem.flow.epsilon + tolerance {
            warnings.push(IterationWarning::LeftTrustRegion { step, norm: trust });
        }
        // The next step also reports the residuals of `next`.
        let following = picard_step(problem, ws, &next)?;
        history.push(IterationRecord { step, update_norm: update, contraction, residuals: following.residuals, trust_norm: trust });
        current = next;
        if update <= tolerance {
            let consistency_change = update_norm(ws, &following.next, &current)?;
            let edge = edge_profile(ws, &current, settings.edge_samples)?;
            return Ok(IterationState {
                contraction_history: history.iter().filter_map(|h| h.contraction).collect(),
                residuals: following.residuals,
                iterate: current,
                history,
                edge_profile: edge,
                u0_norm: ws.u0_norm,
                tolerance,
                consistency_change,
                warnings,
            });
        }
        outcome = following;
    }
    Err(NonlinearError::NoConvergence { updates })
}

/// Shock surface samples and the attachment defect along the edge.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockSurface {
    /// (y₂, y₃, x) with x the physical shock point.
    pub points: Vec<(f64, f64, [f64; 3])>,
    /// (y₂, x₁, x₃) of the shock point on the edge y₃ = 0.
    pub attachment: Vec<(f64, f64, f64)>,
    /// Least-squares slope of x₃ against x₁ over all samples.
    pub fitted_slope: f64,
}

/// Push y₁ = 0 through the inverse map: (u(0,y₂,y₃), y₂, y₃ + b₀u(0,y₂,y₃)).
pub fn shock_surface(
    problem: &Problem,
    ws: &Workspace,
    iterate: &Iterate,
    y2_count: usize,
    y3_count: usize,
) -> Result<ShockSurface, NonlinearError> {
    let length = ws.domain.length();
    let mut points = Vec::with_capacity(y2_count * y3_count);
    let mut attachment = Vec::with_capacity(y2_count);
    for i in 0..y2_count {
        let y2 = math::TAU * i as f64 / y2_count as f64;
        for j in 0..y3_count {
            let y3 = length * j as f64 / (y3_count - 1).max(1) as f64;
            let u = iterate.jet(problem, ws, y3, math::FRAC_PI_2, y2, 0)?.value;
            let x = problem.map.inverse([0.0, y2, y3], u);
            if j == 0 {
                attachment.push((y2, x[0], x[2]));
            }
            points.push((y2, y3, x));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.2[0]).collect();
    let zs: Vec<f64> = points.iter().map(|p| p.2[2]).collect();
    Ok(ShockSurface { fitted_slope: math::fit_slope(&xs, &zs), points, attachment })
}

/// Relative change of the edge profile when the cut radius doubles.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldReport {
    pub base_radius: f64,
    pub doubled_radius: f64,
    pub max_edge: f64,
    pub max_change: f64,
    pub relative_change: f64,
}

pub fn far_field_study(problem: &Problem, ws: &Workspace, base: &IterationState) -> Result<FarFieldReport, NonlinearError> {
    let mut settings = ws.settings.clone();
    settings.cut_radius *= 2.0;
    let doubled = Workspace::new(problem, settings)?;
    let state = run_iteration(problem, &doubled)?;
    let max_edge = base.max_edge();
    let max_change = base
        .edge_profile
        .iter()
        .zip(&state.edge_profile)
        .fold(0.0f64, |m, (a, b)| m.max(math::abs(a.1 - b.1)));
    Ok(FarFieldReport {
        base_radius: ws.domain.length(),
        doubled_radius: doubled.domain.length(),
        max_edge,
        max_change,
        relative_change: if max_edge > 0.0 { max_change / max_edge } else { max_change },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gas() -> GasParams {
        GasParams::new(1.4, 1.0, 1.0).unwrap()
    }

    fn wave() -> Perturbation {
        Perturbation::Wave { support: 2.0, taper: 4.0, wavenumber: 1, phase: 0.0 }
    }

    #[test]
    fn density_round_trips_and_stagnation_value() {
        let g = GasParams::new(2.0, 1.0, 1.0).unwrap();
        let c0 = g.bernoulli_constant(3.0);
        assert_eq!(c0, 6.5);
        assert!((density_from_gradient(&g, c0, [3.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((density_from_gradient(&g, c0, [0.0; 3]).unwrap() - 3.25).abs() < 1e-15);
        assert!(matches!(density_from_gradient(&g, c0, [4.0, 0.0, 0.0]), Err(NonlinearError::Vacuum(_))));
    }

    #[test]
    fn bump_derivatives_match_differences() {
        let h = 1e-5;
        for &s in &[0.2, 0.5, 0.77] {
            let b = bump(s);
            let d1 = (bump(s + h)[0] - bump(s - h)[0]) / (2.0 * h);
            let d2 = (bump(s + h)[1] - bump(s - h)[1]) / (2.0 * h);
            assert!((b[1] - d1).abs() < 1e-7 * b[0].max(1.0));
            assert!((b[2] - d2).abs() < 1e-5 * b[0].max(1.0));
        }
        assert_eq!(bump(0.0), [0.0; 3]);
        assert_eq!(bump(1.0), [0.0; 3]);
        assert_eq!(bump(0.5)[0], 1.0);
    }

    #[test]
    fn perturbation_jet_matches_differences() {
        let psi = wave();
        let x = [0.7, 1.1, 0.9];
        let j = psi.jet(x);
        let h = 1e-5;
        for i in 0..3 {
            let mut p = x;
            p[i] += h;
            let mut m = x;
            m[i] -= h;
            let d = (psi.jet(p).value - psi.jet(m).value) / (2.0 * h);
            assert!((j.gradient[i] - d).abs() < 1e-8, "{i}");
            for k in 0..3 {
                let d2 = (psi.jet(p).gradient[k] - psi.jet(m).gradient[k]) / (2.0 * h);
                assert!((j.hessian[i][k] - d2).abs() < 1e-7, "{i}{k}");
            }
        }
    }

    #[test]
    fn min_eigenvalue_of_known_matrices() {
        assert_eq!(min_eigenvalue(&[[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]]), 2.0);
        let m = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]];
        assert!((min_eigenvalue(&m) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn background_normalisations_are_near_unity() {
        let flow = IncomingFlow::new(20.0, 0.0, wave()).unwrap();
        let p = Problem::new(gas(), 0.1, flow).unwrap();
        assert!((p.interior_scale() - 1.0).abs() < 1e-3, "{}", p.interior_scale());
        assert!(p.shock_scale() > 0.99 && p.shock_scale() < 1.0);
    }

    #[test]
    fn trig_slots_interpolate_band_limited_data() {
        let ny = 12;
        let ys: Vec<f64> = (0..ny).map(|b| math::TAU * b as f64 / ny as f64).collect();
        let table: Vec<Vec<[f64; 3]>> = ys.iter().map(|&y| trig_slots(ny, y)).collect();
        let f = |y: f64| 0.3 + (2.0 * y).sin() - 0.5 * (3.0 * y).cos();
        let values: Vec<f64> = ys.iter().map(|&y| f(y)).collect();
        let data = RayData::new(ny, &values, &table);
        let y = 0.77;
        let trig = trig_slots(ny, y);
        let mut acc = [0.0; 3];
        for (slot, t) in trig.iter().enumerate() {
            for d in 0..3 {
                acc[d] += data.coeffs[slot] * t[d];
            }
        }
        assert!((acc[0] - f(y)).abs() < 1e-14);
        assert!((acc[1] - (2.0 * (2.0 * y).cos() + 1.5 * (3.0 * y).sin())).abs() < 1e-13);
        assert!((acc[2] - (-4.0 * (2.0 * y).sin() + 4.5 * (3.0 * y).cos())).abs() < 1e-12);
    }
}
