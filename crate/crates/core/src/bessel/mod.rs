//! Modified Bessel functions I_ν and K_ν of real order ν ≥ 0 and positive argument.
//!
//! Every evaluation is carried out in the log domain, so kernels such as
//! `I_ν(nr)/I_ν(nL)` or `I_ν K_ν` stay finite for arguments where the raw
//! functions overflow. Evaluation paths:
//!
//! * ascending series for I when t < max(1, ν/4),
//! * Temme/Steed continued fractions for ν < 40 elsewhere,
//! * the large-order uniform expansion for ν ≥ 40.
//!
//! Quadrature of the integral representations is kept as an independent
//! evaluator (`log_eval_quadrature`); it is accurate but roughly a thousand
//! times slower than the continued fractions.

mod bounds;
mod continued_fraction;
mod gamma;
mod integral;
mod series;
mod uniform;

use core::fmt;

pub use bounds::{bound_suite, calibrate_c_m, check_bound, eta_gap, Bound, BoundCheck, CmCalibration, MARGIN_FLOOR};
pub use gamma::{gamma_fn, ln_gamma};
pub use integral::{ln_i_quadrature, ln_k_quadrature};
pub use series::ln_i_series;
pub use uniform::{eta, tau, u_poly, uniform_large_order, v_poly, UniformApprox, UniformAsymptotics};

use crate::math;

/// Orders at or above this use the uniform expansion.
pub const UNIFORM_ORDER: f64 = 40.0;
/// Largest admissible log-magnitude before `exp` overflows.
const LN_MAX: f64 = 709.78;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BesselError {
    #[error("order must be finite and non-negative, got {0}")]
    InvalidOrder(f64),
    #[error("argument must be positive, got {0}")]
    NonPositiveArgument(f64),
    #[error("argument must be non-negative, got {0}")]
    NegativeArgument(f64),
    #[error("gamma function is undefined at {0}")]
    GammaDomain(f64),
    #[error("result overflows f64 (natural log of magnitude {0})")]
    Overflow(f64),
    #[error("bound {bound:?} requested outside its hypothesis region (nu = {nu}, t = {t})")]
    OutsideRegion { bound: Bound, nu: f64, t: f64 },
}

/// Which representation produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Series,
    IntegralQuadrature,
    ContinuedFraction,
    UniformAsymptotic,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::IntegralQuadrature => "integral-quadrature",
            Method::ContinuedFraction => "continued-fraction",
            Method::UniformAsymptotic => "uniform-asymptotic",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A natural logarithm together with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub ln: f64,
    pub method: Method,
    pub est_rel_err: f64,
}

/// Validated (order, argument) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselArgs {
    nu: f64,
    t: f64,
}

impl BesselArgs {
    pub fn new(nu: f64, t: f64) -> Result<Self, BesselError> {
        check_order(nu)?;
        if !(t > 0.0) || !t.is_finite() {
            return Err(BesselError::NonPositiveArgument(t));
        }
        Ok(Self { nu, t })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn evaluate(&self) -> Result<BesselEval, BesselError> {
        evaluate(self.nu, self.t)
    }
}

/// Values of I, K and their derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub i_val: f64,
    pub k_val: f64,
    pub i_prime: f64,
    pub k_prime: f64,
    pub method: Method,
    pub est_rel_err: f64,
}

impl BesselEval {
    pub fn wronskian_residual(&self, t: f64) -> f64 {
        math::abs(self.i_val * self.k_prime - self.i_prime * self.k_val + 1.0 / t)
    }
}

/// Log-domain evaluation: ln I, ln K and the logarithmic derivatives I′/I, K′/K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBessel {
    pub ln_i: f64,
    pub ln_k: f64,
    pub i_ratio: f64,
    pub k_ratio: f64,
    pub method: Method,
    pub est_rel_err: f64,
}

impl LogBessel {
    /// |t·I·K·(K′/K − I′/I) + 1| / t, computed without forming I or K.
    pub fn wronskian_residual(&self, t: f64) -> f64 {
        let product = math::exp(self.ln_i + self.ln_k);
        math::abs(t * product * (self.k_ratio - self.i_ratio) + 1.0) / t
    }
}

fn check_order(nu: f64) -> Result<(), BesselError> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(BesselError::InvalidOrder(nu));
    }
    Ok(())
}

fn check_positive(t: f64) -> Result<(), BesselError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(BesselError::NonPositiveArgument(t));
    }
    Ok(())
}

/// ln I_ν(t), t ≥ 0.
pub fn log_i(nu: f64, t: f64) -> Result<LogValue, BesselError> {
    check_order(nu)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(BesselError::NegativeArgument(t));
    }
    if t == 0.0 {
        return ln_i_series(nu, 0.0);
    }
    if nu >= UNIFORM_ORDER {
        return Ok(uniform::debye_log(nu, t)?.ln_i);
    }
    if t < (0.25 * nu).max(1.0) {
        return ln_i_series(nu, t);
    }
    let c = continued_fraction::cf_log(nu, t)?;
    Ok(LogValue { ln: c.ln_i, method: Method::ContinuedFraction, est_rel_err: c.est_rel_err })
}

/// ln K_ν(t), t > 0.
pub fn log_k(nu: f64, t: f64) -> Result<LogValue, BesselError> {
    check_order(nu)?;
    check_positive(t)?;
    if nu >= UNIFORM_ORDER {
        return Ok(uniform::debye_log(nu, t)?.ln_k);
    }
    let c = continued_fraction::cf_log(nu, t)?;
    Ok(LogValue { ln: c.ln_k, method: Method::ContinuedFraction, est_rel_err: c.est_rel_err })
}

/// Full log-domain evaluation at (ν, t), t > 0.
pub fn log_eval(nu: f64, t: f64) -> Result<LogBessel, BesselError> {
    check_order(nu)?;
    check_positive(t)?;
    if nu >= UNIFORM_ORDER {
        let d = uniform::debye_log(nu, t)?;
        return Ok(LogBessel {
            ln_i: d.ln_i.ln,
            ln_k: d.ln_k.ln,
            i_ratio: d.i_ratio,
            k_ratio: d.k_ratio,
            method: Method::UniformAsymptotic,
            est_rel_err: d.ln_i.est_rel_err,
        });
    }
    let c = continued_fraction::cf_log(nu, t)?;
    Ok(LogBessel {
        ln_i: c.ln_i,
        ln_k: c.ln_k,
        i_ratio: c.i_ratio,
        k_ratio: c.k_ratio,
        method: Method::ContinuedFraction,
        est_rel_err: c.est_rel_err,
    })
}

/// Log-domain evaluation from the integral representations alone, with
/// derivatives from I′ = I_{ν+1} + (ν/t)I and K′ = −K_{|ν−1|} − (ν/t)K.
/// Shares no arithmetic with `log_eval`, so the two cross-check each other.
pub fn log_eval_quadrature(nu: f64, t: f64) -> Result<LogBessel, BesselError> {
    check_order(nu)?;
    check_positive(t)?;
    let li = ln_i_quadrature(nu, t)?;
    let lk = ln_k_quadrature(nu, t)?;
    let li_up = ln_i_quadrature(nu + 1.0, t)?;
    let lk_down = ln_k_quadrature(math::abs(nu - 1.0), t)?;
    let i_ratio = math::exp(li_up.ln - li.ln) + nu / t;
    let k_ratio = -math::exp(lk_down.ln - lk.ln) - nu / t;
    let err = li.est_rel_err.max(lk.est_rel_err).max(li_up.est_rel_err).max(lk_down.est_rel_err);
    Ok(LogBessel { ln_i: li.ln, ln_k: lk.ln, i_ratio, k_ratio, method: Method::IntegralQuadrature, est_rel_err: err })
}

fn unlog(ln: f64) -> Result<f64, BesselError> {
    if ln > LN_MAX {
        return Err(BesselError::Overflow(ln));
    }
    Ok(math::exp(ln))
}

/// I_ν(t), t ≥ 0.
pub fn bessel_i(nu: f64, t: f64) -> Result<f64, BesselError> {
    unlog(log_i(nu, t)?.ln)
}

/// K_ν(t), t > 0.
pub fn bessel_k(nu: f64, t: f64) -> Result<f64, BesselError> {
    unlog(log_k(nu, t)?.ln)
}

/// e^{−t} I_ν(t).
pub fn scaled_i(nu: f64, t: f64) -> Result<f64, BesselError> {
    Ok(math::exp(log_i(nu, t)?.ln - t))
}

/// e^{t} K_ν(t).
pub fn scaled_k(nu: f64, t: f64) -> Result<f64, BesselError> {
    unlog(log_k(nu, t)?.ln + t)
}

/// (I′_ν(t), K′_ν(t)).
pub fn bessel_derivs(nu: f64, t: f64) -> Result<(f64, f64), BesselError> {
    let e = evaluate(nu, t)?;
    Ok((e.i_prime, e.k_prime))
}

/// Values and derivatives at (ν, t), t > 0.
pub fn evaluate(nu: f64, t: f64) -> Result<BesselEval, BesselError> {
    let l = log_eval(nu, t)?;
    let i_val = unlog(l.ln_i)?;
    let k_val = unlog(l.ln_k)?;
    Ok(BesselEval {
        i_val,
        k_val,
        i_prime: i_val * l.i_ratio,
        k_prime: k_val * l.k_ratio,
        method: l.method,
        est_rel_err: l.est_rel_err,
    })
}
