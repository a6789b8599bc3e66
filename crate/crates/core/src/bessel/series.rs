use super::gamma::ln_gamma;
use super::{BesselError, LogValue, Method};
use crate::math;

const MAX_TERMS: usize = 2000;

/// ln I_ν(t) from the ascending series; every term is positive.
pub fn ln_i_series(nu: f64, t: f64) -> Result<LogValue, BesselError> {
    if t == 0.0 {
        let ln = if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY };
        return Ok(LogValue { ln, method: Method::Series, est_rel_err: 0.0 });
    }
    let x = 0.25 * t * t;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut used = 0usize;
    for k in 1..=MAX_TERMS {
        let kf = k as f64;
        term *= x / (kf * (nu + kf));
        sum += term;
        used = k;
        if term < 1e-17 * sum {
            break;
        }
    }
    let ln = nu * math::ln(0.5 * t) - ln_gamma(nu + 1.0)? + math::ln(sum);
    let est_rel_err = f64::EPSILON * (4.0 + used as f64 * 0.5 + math::abs(ln));
    Ok(LogValue { ln, method: Method::Series, est_rel_err })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_oracle_values() {
        // Σ_k (t/2)^{2k+ν} / (k! (k+ν)!) summed independently to 30 terms.
        let mut i0 = 0.0;
        let mut i1 = 0.0;
        let mut fact = 1.0f64;
        for k in 0..30 {
            if k > 0 {
                fact *= k as f64;
            }
            let base = math::powi(0.5, 2 * k) / (fact * fact);
            i0 += base;
            i1 += 0.5 * base / (k as f64 + 1.0);
        }
        assert!((i0 - 1.266_065_877_752_008_4).abs() < 1e-15);
        assert!((i1 - 0.565_159_103_992_485_1).abs() < 1e-15);
        let s0 = math::exp(ln_i_series(0.0, 1.0).unwrap().ln);
        let s1 = math::exp(ln_i_series(1.0, 1.0).unwrap().ln);
        assert!(((s0 - i0) / i0).abs() < 1e-14);
        assert!(((s1 - i1) / i1).abs() < 1e-14);
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(ln_i_series(0.0, 0.0).unwrap().ln, 0.0);
        assert_eq!(ln_i_series(2.0, 0.0).unwrap().ln, f64::NEG_INFINITY);
    }
}
