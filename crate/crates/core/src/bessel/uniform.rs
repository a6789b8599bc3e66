//! Large-order expansions of I_ν(νz), K_ν(νz) and their derivatives, uniform in z.

use alloc::vec;
use alloc::vec::Vec;

use super::{BesselError, LogValue, Method};
use crate::math;

/// Terms used by the production evaluator; far beyond what ν ≥ 40 needs.
pub(crate) const FULL_TERMS: usize = 14;
/// Terms exposed through [`uniform_large_order`].
pub const SHORT_TERMS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
struct Poly(Vec<f64>);

impl Poly {
    fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![0.0]);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(j, c)| j as f64 * c).collect())
    }

    fn antiderivative(&self) -> Poly {
        let mut out = vec![0.0; self.0.len() + 1];
        for (j, c) in self.0.iter().enumerate() {
            out[j + 1] = c / (j as f64 + 1.0);
        }
        Poly(out)
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![0.0; n];
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.0.get(j).copied().unwrap_or(0.0) + other.0.get(j).copied().unwrap_or(0.0);
        }
        Poly(out)
    }

    fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect())
    }
}

/// The polynomial families u_k and υ_k, k = 0..count.
#[derive(Debug, Clone)]
struct DebyeTable {
    u: Vec<Poly>,
    v: Vec<Poly>,
}

fn build_table(count: usize) -> DebyeTable {
    let half_s2_one_minus_s2 = Poly(vec![0.0, 0.0, 0.5, 0.0, -0.5]);
    let one_minus_5s2 = Poly(vec![1.0, 0.0, -5.0]);
    let s_times_s2_minus_1 = Poly(vec![0.0, -1.0, 0.0, 1.0]);
    let s = Poly(vec![0.0, 1.0]);
    let mut u = vec![Poly(vec![1.0])];
    for k in 0..count {
        let uk = &u[k];
        let next = half_s2_one_minus_s2
            .mul(&uk.derivative())
            .add(&one_minus_5s2.mul(uk).antiderivative().scale(0.125));
        u.push(next);
    }
    let mut v = vec![Poly(vec![1.0])];
    for k in 1..=count {
        let prev = &u[k - 1];
        let inner = prev.scale(0.5).add(&s.mul(&prev.derivative()));
        v.push(u[k].add(&s_times_s2_minus_1.mul(&inner)));
    }
    DebyeTable { u, v }
}

#[cfg(feature = "std")]
fn with_table<R>(f: impl FnOnce(&DebyeTable) -> R) -> R {
    static TABLE: std::sync::OnceLock<DebyeTable> = std::sync::OnceLock::new();
    f(TABLE.get_or_init(|| build_table(FULL_TERMS)))
}

#[cfg(not(feature = "std"))]
fn with_table<R>(f: impl FnOnce(&DebyeTable) -> R) -> R {
    f(&build_table(FULL_TERMS))
}

/// u_k(s) for k ≤ 14.
pub fn u_poly(k: usize, s: f64) -> f64 {
    assert!(k <= FULL_TERMS);
    with_table(|t| t.u[k].eval(s))
}

/// υ_k(s) for k ≤ 14 (υ₀ = 1).
pub fn v_poly(k: usize, s: f64) -> f64 {
    assert!(k <= FULL_TERMS);
    with_table(|t| t.v[k].eval(s))
}

/// η(z) = √(1+z²) + ln(z / (1 + √(1+z²))).
pub fn eta(z: f64) -> f64 {
    let root = math::sqrt(1.0 + z * z);
    root + math::ln(z / (1.0 + root))
}

/// τ(z) = 1/√(1+z²).
pub fn tau(z: f64) -> f64 {
    1.0 / math::sqrt(1.0 + z * z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformAsymptotics {
    pub eta: f64,
    pub tau: f64,
    /// u₀..u₃ at τ.
    pub u_coeffs: [f64; 4],
    /// υ₁..υ₃ at τ.
    pub v_coeffs: [f64; 3],
}

/// Truncated large-order expansions (three correction terms) at argument νz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformApprox {
    pub asymptotics: UniformAsymptotics,
    pub i_approx: f64,
    pub k_approx: f64,
    pub i_prime_approx: f64,
    pub k_prime_approx: f64,
}

struct Sums {
    u: f64,
    u_alt: f64,
    v: f64,
    v_alt: f64,
    last: f64,
}

fn sums(nu: f64, p: f64, terms: usize) -> Sums {
    with_table(|table| {
        let mut s = Sums { u: 1.0, u_alt: 1.0, v: 1.0, v_alt: 1.0, last: 0.0 };
        let mut scale = 1.0;
        let mut sign = 1.0;
        for k in 1..=terms {
            scale /= nu;
            sign = -sign;
            let uk = table.u[k].eval(p) * scale;
            let vk = table.v[k].eval(p) * scale;
            s.u += uk;
            s.u_alt += sign * uk;
            s.v += vk;
            s.v_alt += sign * vk;
            s.last = math::abs(uk).max(math::abs(vk));
        }
        s
    })
}

fn check(nu: f64, z: f64) -> Result<(), BesselError> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(BesselError::InvalidOrder(nu));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(BesselError::NonPositiveArgument(z));
    }
    Ok(())
}

/// Three-term large-order expansions at `I_ν(ν·t_scaled)` and friends.
pub fn uniform_large_order(nu: f64, t_scaled: f64) -> Result<UniformApprox, BesselError> {
    check(nu, t_scaled)?;
    let z = t_scaled;
    let p = tau(z);
    let e = eta(z);
    let asymptotics = UniformAsymptotics {
        eta: e,
        tau: p,
        u_coeffs: [u_poly(0, p), u_poly(1, p), u_poly(2, p), u_poly(3, p)],
        v_coeffs: [v_poly(1, p), v_poly(2, p), v_poly(3, p)],
    };
    let s = sums(nu, p, SHORT_TERMS);
    let quarter = math::pow(1.0 + z * z, 0.25);
    let grow = math::exp(nu * e);
    let decay = math::exp(-nu * e);
    let i_pref = 1.0 / math::sqrt(math::TAU * nu);
    let k_pref = math::sqrt(math::PI / (2.0 * nu));
    Ok(UniformApprox {
        asymptotics,
        i_approx: i_pref * grow / quarter * s.u,
        k_approx: k_pref * decay / quarter * s.u_alt,
        i_prime_approx: i_pref * quarter / z * grow * s.v,
        k_prime_approx: -k_pref * quarter / z * decay * s.v_alt,
    })
}

/// Log-domain values from the long expansion.
pub(crate) struct DebyeLog {
    pub ln_i: LogValue,
    pub ln_k: LogValue,
    pub i_ratio: f64,
    pub k_ratio: f64,
}

pub(crate) fn debye_log(nu: f64, t: f64) -> Result<DebyeLog, BesselError> {
    let z = t / nu;
    check(nu, z)?;
    let p = tau(z);
    let e = eta(z);
    let s = sums(nu, p, FULL_TERMS);
    let ln_quarter = 0.25 * math::ln1p(z * z);
    let err = s.last * 4.0 + 8.0 * f64::EPSILON * (1.0 + math::abs(nu * e));
    let ln_i = nu * e - 0.5 * math::ln(math::TAU * nu) - ln_quarter + math::ln(s.u);
    let ln_k = -nu * e + 0.5 * math::ln(math::PI / (2.0 * nu)) - ln_quarter + math::ln(s.u_alt);
    let root = math::sqrt(1.0 + z * z);
    Ok(DebyeLog {
        ln_i: LogValue { ln: ln_i, method: Method::UniformAsymptotic, est_rel_err: err },
        ln_k: LogValue { ln: ln_k, method: Method::UniformAsymptotic, est_rel_err: err },
        i_ratio: root / z * s.v / s.u,
        k_ratio: -root / z * s.v_alt / s.u_alt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_polynomials() {
        for s in [0.0, 0.3, 0.5, 0.9, 1.0] {
            assert_eq!(u_poly(0, s), 1.0);
            let u1 = (3.0 * s - 5.0 * s * s * s) / 24.0;
            assert!((u_poly(1, s) - u1).abs() < 1e-16);
            let v1 = (-9.0 * s + 7.0 * s * s * s) / 24.0;
            assert!((v_poly(1, s) - v1).abs() < 1e-16);
        }
        assert!((u_poly(1, 0.5) - 0.036_458_333_333_333_33).abs() < 1e-15);
    }

    #[test]
    fn second_polynomial_matches_closed_form() {
        // u₂(s) = (81s² − 462s⁴ + 385s⁶)/1152
        for s in [0.2, 0.7, 1.0] {
            let s2 = s * s;
            let closed = (81.0 * s2 - 462.0 * s2 * s2 + 385.0 * s2 * s2 * s2) / 1152.0;
            assert!((u_poly(2, s) - closed).abs() < 1e-15);
        }
    }

    #[test]
    fn eta_derivative_identity() {
        for z in [0.05, 0.5, 1.0, 4.0, 30.0] {
            let h = 1e-5 * z;
            let d = (eta(z + h) - eta(z - h)) / (2.0 * h);
            let ratio = d * z / math::sqrt(1.0 + z * z);
            assert!((ratio - 1.0).abs() < 1e-9, "z = {z}");
        }
    }
}
