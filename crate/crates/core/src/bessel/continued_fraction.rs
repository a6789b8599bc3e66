//! Temme's series and Steed's continued fraction for K, a Lentz continued
//! fraction for I_{ν+1}/I_ν, and the Wronskian to recover I_ν.
//!
//! All quantities are carried as logarithms or ratios, so the cost is
//! O(ν + t) with no overflow for any (ν, t) in range.

use super::BesselError;
use crate::math;

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const TEMME_LIMIT: f64 = 2.0;

/// Taylor coefficients of 1/Γ(1+z) about z = 0.
const RECIP_GAMMA: [f64; 27] = [
    1.0,
    0.577_215_664_901_532_860_61,
    -0.655_878_071_520_253_881_08,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_748,
    -0.009_621_971_527_876_973_562_1,
    0.007_218_943_246_663_099_542_4,
    -0.001_165_167_591_859_065_112_1,
    -0.000_215_241_674_114_950_972_82,
    0.000_128_050_282_388_116_186_15,
    -0.000_020_134_854_780_788_238_656,
    -1.250_493_482_142_670_657_3e-6,
    1.133_027_231_981_695_882_4e-6,
    -2.056_338_416_977_607_103_5e-7,
    6.116_095_104_481_415_817_9e-9,
    5.002_007_644_469_222_930_1e-9,
    -1.181_274_570_487_020_144_6e-9,
    1.043_426_711_691_100_510_5e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708_2e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783_2e-14,
    -5.348_122_539_423_017_982_4e-15,
    1.226_778_628_238_260_790_2e-15,
    -1.181_259_301_697_458_769_5e-16,
    1.186_692_254_751_600_332_6e-18,
];

/// (Γ₁(μ), Γ₂(μ), 1/Γ(1+μ), 1/Γ(1−μ)) for |μ| ≤ ½.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mut odd = 0.0;
    let mut even = 0.0;
    for (j, &a) in RECIP_GAMMA.iter().enumerate().rev() {
        if j % 2 == 1 {
            odd = odd * mu * mu + a;
        } else {
            even = even * mu * mu + a;
        }
    }
    // 1/Γ(1±μ) = even ± μ·odd
    (-odd, even, even + mu * odd, even - mu * odd)
}

/// (ln K_μ(x), K_{μ+1}(x)/K_μ(x)) for |μ| ≤ ½.
fn k_low_order(mu: f64, x: f64) -> (f64, f64, usize) {
    let mu2 = mu * mu;
    if x < TEMME_LIMIT {
        let half = 0.5 * x;
        let pimu = math::PI * mu;
        let fact = if math::abs(pimu) < EPS { 1.0 } else { pimu / math::sin(pimu) };
        let d = -math::ln(half);
        let e = mu * d;
        let fact2 = if math::abs(e) < EPS { 1.0 } else { libm::sinh(e) / e };
        let (g1, g2, recip_plus, recip_minus) = temme_gammas(mu);
        let mut ff = fact * (g1 * libm::cosh(e) + g2 * fact2 * d);
        let mut sum = ff;
        let ee = math::exp(e);
        let mut p = 0.5 * ee / recip_plus;
        let mut q = 0.5 / (ee * recip_minus);
        let mut c = 1.0;
        let dd = half * half;
        let mut sum1 = p;
        let mut iters = 0;
        for i in 1..1000 {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            iters = i;
            if math::abs(del) < math::abs(sum) * EPS {
                break;
            }
        }
        (math::ln(sum), sum1 * (2.0 / x) / sum, iters)
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut iters = 0;
        for i in 2..10_000 {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            iters = i;
            if math::abs(dels / s) < EPS {
                break;
            }
        }
        h *= a1;
        let ln_k = 0.5 * math::ln(math::PI / (2.0 * x)) - x - math::ln(s);
        (ln_k, (mu + x + 0.5 - h) / x, iters)
    }
}

/// I_{ν+1}(x)/I_ν(x) by modified Lentz.
fn i_ratio_up(nu: f64, x: f64) -> (f64, usize) {
    let max_iter = 1000 + 10 * (x as usize);
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..=max_iter {
        let b = 2.0 * (nu + j as f64) / x;
        d = b + d;
        if d == 0.0 {
            d = TINY;
        }
        c = b + 1.0 / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if math::abs(delta - 1.0) < EPS {
            return (f, j);
        }
    }
    (f, max_iter)
}

pub(crate) struct CfLog {
    pub ln_i: f64,
    pub ln_k: f64,
    pub i_ratio: f64,
    pub k_ratio: f64,
    pub est_rel_err: f64,
}

/// ln I_ν, ln K_ν and the logarithmic derivatives for ν ≥ 0, x > 0.
pub(crate) fn cf_log(nu: f64, x: f64) -> Result<CfLog, BesselError> {
    let steps = math::floor(nu + 0.5);
    let mu = nu - steps;
    let (mut ln_k, mut ratio, k_iters) = k_low_order(mu, x);
    // Upward recurrence on K_{μ+j+1}/K_{μ+j}; stable for K.
    for j in 1..=(steps as usize) {
        ln_k += math::ln(ratio);
        ratio = 2.0 * (mu + j as f64) / x + 1.0 / ratio;
    }
    let (rho, i_iters) = i_ratio_up(nu, x);
    // Wronskian: I_ν K_{ν+1} + I_{ν+1} K_ν = 1/x.
    let ln_i = -math::ln(x) - ln_k - math::ln(ratio + rho);
    let est_rel_err =
        f64::EPSILON * (16.0 + steps + math::sqrt((k_iters + i_iters) as f64) + math::abs(ln_i).max(math::abs(ln_k)));
    Ok(CfLog { ln_i, ln_k, i_ratio: rho + nu / x, k_ratio: nu / x - ratio, est_rel_err })
}
