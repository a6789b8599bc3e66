//! Lift of the inhomogeneous Neumann data on the two rays.
//!
//! With Θ = π/2 − θ₀ the lift is h = r·(g₁φ₁ + g₂φ₂), where
//! φ₁ = (θ−θ₀)²/(2Θ) − θ and φ₂ = (θ−θ₀)²/(2Θ). Then −∂_θh = r·g₁ on θ = θ₀
//! and ∂_θh = r·g₂ on θ = π/2, so v = u − h has homogeneous Neumann data.

use super::WedgeDomain;

/// Value and derivatives up to second order of a boundary datum g(r, y₂).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub d_r: f64,
    pub d_y: f64,
    pub d_rr: f64,
    pub d_ry: f64,
    pub d_yy: f64,
}

/// Neumann datum on one ray, 2π-periodic in y₂.
pub trait BoundaryDatum: Sync {
    fn jet(&self, r: f64, y2: f64) -> Jet;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroDatum;

impl BoundaryDatum for ZeroDatum {
    fn jet(&self, _r: f64, _y2: f64) -> Jet {
        Jet::default()
    }
}

impl<F: Fn(f64, f64) -> Jet + Sync> BoundaryDatum for F {
    fn jet(&self, r: f64, y2: f64) -> Jet {
        self(r, y2)
    }
}

#[derive(Clone, Copy)]
pub struct NeumannLift<'a> {
    domain: WedgeDomain,
    lower: &'a dyn BoundaryDatum,
    upper: &'a dyn BoundaryDatum,
}

/// Value, gradient (∂_r, ∂_θ, ∂_y) and Laplacian of the lift at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftSample {
    pub value: f64,
    pub gradient: [f64; 3],
    pub laplacian: f64,
}

pub fn neumann_lift<'a>(
    lower: &'a dyn BoundaryDatum,
    upper: &'a dyn BoundaryDatum,
    domain: &WedgeDomain,
) -> NeumannLift<'a> {
    NeumannLift { domain: *domain, lower, upper }
}

impl NeumannLift<'_> {
    /// (φ₁, φ₂, φ₁′, φ₂′); both φ″ equal 1/Θ.
    fn profiles(&self, theta: f64) -> (f64, f64, f64, f64) {
        let width = self.domain.aperture();
        let s = theta - self.domain.theta0();
        let quad = s * s / (2.0 * width);
        (quad - theta, quad, s / width - 1.0, s / width)
    }

    pub fn sample(&self, r: f64, theta: f64, y2: f64) -> LiftSample {
        let g1 = self.lower.jet(r, y2);
        let g2 = self.upper.jet(r, y2);
        let (p1, p2, dp1, dp2) = self.profiles(theta);
        let curvature = 1.0 / self.domain.aperture();
        let value = r * (g1.value * p1 + g2.value * p2);
        let d_r = (g1.value + r * g1.d_r) * p1 + (g2.value + r * g2.d_r) * p2;
        let d_theta = r * (g1.value * dp1 + g2.value * dp2);
        let d_y = r * (g1.d_y * p1 + g2.d_y * p2);
        // Δ(r g φ) = φ(3g_r + r g_rr + g/r + r g_yy) + g φ″/r
        let radial = |g: &Jet| 3.0 * g.d_r + r * g.d_rr + g.value / r + r * g.d_yy;
        let laplacian = if r > 0.0 {
            p1 * radial(&g1) + p2 * radial(&g2) + curvature * (g1.value + g2.value) / r
        } else {
            0.0
        };
        LiftSample { value, gradient: [d_r, d_theta, d_y], laplacian }
    }

    pub fn is_zero(&self, r: f64, y2: f64) -> bool {
        self.lower.jet(r, y2) == Jet::default() && self.upper.jet(r, y2) == Jet::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math;

    fn domain() -> WedgeDomain {
        WedgeDomain::new(math::PI / 4.0, 4.0).unwrap()
    }

    fn constant(c: f64) -> impl Fn(f64, f64) -> Jet + Sync {
        move |_, _| Jet { value: c, ..Jet::default() }
    }

    #[test]
    fn zero_data_give_zero_lift() {
        let d = domain();
        let lift = neumann_lift(&ZeroDatum, &ZeroDatum, &d);
        let s = lift.sample(1.3, 1.0, 0.4);
        assert_eq!(s.value, 0.0);
        assert_eq!(s.laplacian, 0.0);
    }

    #[test]
    fn opposite_constants_give_linear_lift() {
        let d = domain();
        let (lo, hi) = (constant(-1.0), constant(1.0));
        let lift = neumann_lift(&lo, &hi, &d);
        for theta in [d.theta0(), 1.0, math::FRAC_PI_2] {
            let s = lift.sample(2.0, theta, 0.3);
            assert!((s.value - 2.0 * theta).abs() < 1e-14);
        }
    }

    #[test]
    fn boundary_identities_for_periodic_data() {
        let d = domain();
        let g = |_r: f64, y: f64| Jet { value: y.cos(), d_y: -y.sin(), d_yy: -y.cos(), ..Jet::default() };
        let lift = neumann_lift(&g, &g, &d);
        for k in 0..20 {
            let r = 0.2 + 0.19 * k as f64;
            let y = 0.31 * k as f64;
            let lo = lift.sample(r, d.theta0(), y);
            let hi = lift.sample(r, math::FRAC_PI_2, y);
            assert!((-lo.gradient[1] - r * y.cos()).abs() < 1e-12);
            assert!((hi.gradient[1] - r * y.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        let d = domain();
        let g1 = |r: f64, y: f64| {
            let e = (-r).exp();
            Jet { value: e * y.sin(), d_r: -e * y.sin(), d_y: e * y.cos(), d_rr: e * y.sin(), d_ry: -e * y.cos(), d_yy: -e * y.sin() }
        };
        let g2 = |r: f64, y: f64| Jet { value: r * r * y.cos(), d_r: 2.0 * r * y.cos(), d_y: -r * r * y.sin(), d_rr: 2.0 * y.cos(), d_ry: -2.0 * r * y.sin(), d_yy: -r * r * y.cos() };
        let lift = neumann_lift(&g1, &g2, &d);
        let (r, t, y) = (1.7, 1.1, 0.8);
        let h = 1e-3;
        let v = |r: f64, t: f64, y: f64| lift.sample(r, t, y).value;
        let second = |f: &dyn Fn(f64) -> f64| (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h);
        let first = |f: &dyn Fn(f64) -> f64| (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
        let v_rr = second(&|e| v(r + e, t, y));
        let v_r = first(&|e| v(r + e, t, y));
        let v_tt = second(&|e| v(r, t + e, y));
        let v_yy = second(&|e| v(r, t, y + e));
        let fd = v_rr + v_r / r + v_tt / (r * r) + v_yy;
        let s = lift.sample(r, t, y);
        assert!((fd - s.laplacian).abs() < 1e-8, "{fd} {}", s.laplacian);
        assert!((v_r - s.gradient[0]).abs() < 1e-10);
    }
}
