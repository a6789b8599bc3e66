//! Integral representations evaluated by adaptive quadrature in log-shifted form.
//!
//! I-integral, with u = sin φ:
//!   I_ν(t) = 2 e^t (2t)^ν / (√π Γ(ν+½)) ∫₀^{π/2} e^{−2t sin²φ} (½ sin 2φ)^{2ν} dφ
//! K-integral, with u = 2t sinh²x:
//!   K_ν(t) = 2√π (2t)^ν e^{−t} / Γ(ν+½) ∫₀^X e^{−2t sinh²x} (½ sinh 2x)^{2ν} dx
//! where X corresponds to the cut u = 50 + 20ν. Both substitutions remove the
//! (1∓u²)^{ν−½} endpoint singularities, and the shift by the sampled maximum
//! keeps the integrand inside floating-point range for every order.

use super::gamma::ln_gamma;
use super::{BesselError, LogValue, Method};
use crate::math;
use crate::quad::{adaptive, Tolerance};

const TOL: Tolerance = Tolerance { abs: 0.0, rel: 1e-14 };
const MAX_PANELS: usize = 400;
const PROBES: usize = 64;

fn shifted_integral<F: Fn(f64) -> f64>(log_f: F, upper: f64) -> (f64, f64) {
    let mut shift = f64::NEG_INFINITY;
    for j in 0..=PROBES {
        let v = log_f(upper * j as f64 / PROBES as f64);
        if v.is_finite() && v > shift {
            shift = v;
        }
    }
    if !shift.is_finite() {
        shift = 0.0;
    }
    let result = adaptive(
        |x| {
            let v = log_f(x);
            if v == f64::NEG_INFINITY {
                0.0
            } else {
                math::exp(v - shift)
            }
        },
        0.0,
        upper,
        TOL,
        MAX_PANELS,
    );
    let rel_err = if result.value > 0.0 { result.error / result.value } else { 1.0 };
    (shift + math::ln(result.value), rel_err)
}

fn power_term(nu: f64, base: f64) -> f64 {
    if nu == 0.0 {
        0.0
    } else if base <= 0.0 {
        f64::NEG_INFINITY
    } else {
        2.0 * nu * math::ln(base)
    }
}

/// ln I_ν(t) for t > 0 by quadrature.
pub fn ln_i_quadrature(nu: f64, t: f64) -> Result<LogValue, BesselError> {
    let log_f = |phi: f64| {
        let s = math::sin(phi);
        -2.0 * t * s * s + power_term(nu, 0.5 * math::sin(2.0 * phi))
    };
    let (ln_j, rel_err) = shifted_integral(log_f, math::FRAC_PI_2);
    let ln = math::LN_2 + t + nu * math::ln(2.0 * t) - 0.5 * math::ln(math::PI) - ln_gamma(nu + 0.5)? + ln_j;
    let est_rel_err = rel_err + f64::EPSILON * (8.0 + math::abs(ln) + 2.0 * t);
    Ok(LogValue { ln, method: Method::IntegralQuadrature, est_rel_err })
}

/// ln K_ν(t) for t > 0 by quadrature.
pub fn ln_k_quadrature(nu: f64, t: f64) -> Result<LogValue, BesselError> {
    let cut = 50.0 + 20.0 * nu;
    let upper = libm::asinh(math::sqrt(cut / (2.0 * t)));
    let log_f = |x: f64| {
        let s = libm::sinh(x);
        -2.0 * t * s * s + power_term(nu, 0.5 * libm::sinh(2.0 * x))
    };
    let (ln_j, rel_err) = shifted_integral(log_f, upper);
    let ln = math::LN_2 + 0.5 * math::ln(math::PI) + nu * math::ln(2.0 * t) - t - ln_gamma(nu + 0.5)? + ln_j;
    let est_rel_err = rel_err + f64::EPSILON * (8.0 + math::abs(ln) + 2.0 * t);
    Ok(LogValue { ln, method: Method::IntegralQuadrature, est_rel_err })
}
