//! Homogeneous Laplace problem in the cut-off wedge with prescribed outer flux
//! ∂_r W = g on r = L, solved in closed form mode by mode, and the L-sweep that
//! measures how the weighted size of W_L behaves as the domain grows.

use alloc::vec;
use alloc::vec::Vec;

use crate::bessel::{log_eval, BesselError};
use crate::math;
use crate::par;
use crate::spectral::{
    combine_modes, project_slab, AngularRule, FieldSample, ModeKey, ModeTable, Parity, RadialSample, SpectralError,
    Truncation, WedgeDomain,
};

/// Relative size of g₀₀ (against sup|g|) above which the flux is rejected.
pub const COMPAT_TOLERANCE: f64 = 1e-9;
/// Allowed gap |g(θ, 0) − g(θ, 2π)| relative to sup|g|.
pub const PERIODICITY_TOLERANCE: f64 = 1e-9;
/// Slack on fitted coefficient exponents before a decay bound counts as violated.
pub const EXPONENT_SLACK: f64 = 0.3;
/// One upward step of at most this relative size is tolerated in a decay trend.
pub const TREND_SLACK: f64 = 0.05;
/// A sweep only counts as decaying if its fitted log-log rate is at most this.
pub const DECAY_RATE_CEILING: f64 = -0.01;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HomogeneousError {
    #[error("flux violates solvability: |g₀₀| = {g00:e} exceeds {tolerance:e}")]
    CompatibilityViolation { g00: f64, tolerance: f64 },
    #[error("flux is not 2π-periodic in y₂: gap {gap:e} at θ = {theta}")]
    NotPeriodic { theta: f64, gap: f64 },
    #[error("non-finite flux value at θ = {theta}, y₂ = {y2}")]
    NonFiniteFlux { theta: f64, y2: f64 },
    #[error("δ₁ must lie in (δ₀, 1), got δ₁ = {delta1} with δ₀ = {delta0}")]
    InvalidDelta1 { delta0: f64, delta1: f64 },
    #[error("decay study needs at least two radii ≥ 4 in increasing order")]
    InvalidSweep,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Bessel(#[from] BesselError),
}

/// Outer flux g(θ, y₂) sampled on the tensor rule at r = L.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxData {
    domain: WedgeDomain,
    rule: AngularRule,
    /// values[a·ny + b] = g(θ_a, y_b)
    values: Vec<f64>,
    sup: f64,
    compat_residual: f64,
}

impl FluxData {
    pub fn sample<G>(g: &G, domain: &WedgeDomain, trunc: &Truncation) -> Result<Self, HomogeneousError>
    where
        G: Fn(f64, f64) -> f64 + Sync,
    {
        Self::with_rule(g, domain, AngularRule::new(domain, trunc))
    }

    pub fn with_rule<G>(g: &G, domain: &WedgeDomain, rule: AngularRule) -> Result<Self, HomogeneousError>
    where
        G: Fn(f64, f64) -> f64 + Sync,
    {
        let rows = par::map_slice(&rule.thetas, |&t| rule.ys.iter().map(|&y| g(t, y)).collect::<Vec<f64>>());
        let values = rows.concat();
        let ny = rule.ys.len();
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(HomogeneousError::NonFiniteFlux { theta: rule.thetas[pos / ny], y2: rule.ys[pos % ny] });
        }
        let sup = values.iter().fold(0.0f64, |a, &v| a.max(math::abs(v)));
        for &t in &rule.thetas {
            let gap = math::abs(g(t, 0.0) - g(t, math::TAU));
            if !(gap <= PERIODICITY_TOLERANCE * sup.max(1.0)) {
                return Err(HomogeneousError::NotPeriodic { theta: t, gap });
            }
        }
        let mut integral = 0.0;
        for (row, &w) in values.chunks_exact(ny).zip(&rule.theta_weights) {
            integral += w * row.iter().sum::<f64>() * math::TAU / ny as f64;
        }
        Ok(Self { domain: *domain, rule, values, sup, compat_residual: math::abs(integral) })
    }

    pub fn domain(&self) -> &WedgeDomain {
        &self.domain
    }

    /// |∫∫ g dθ dy₂| by the same tensor quadrature as the projection.
    pub fn compat_residual(&self) -> f64 {
        self.compat_residual
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup
    }
}

/// Expansion coefficients of the flux in the angular/periodic eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxModes {
    pub truncation: Truncation,
    /// Indexed like [`ModeTable::key_index`]; entry 0 is g₀₀.
    coefficients: Vec<f64>,
    pub sup: f64,
    /// Fitted exponent of |g_{m0}| against √μ_m.
    pub angular_exponent: Option<f64>,
    /// Fitted exponent of |g_{0n}| against n.
    pub periodic_exponent: Option<f64>,
    /// Fitted exponent of Σ_m √μ_m|g_{mn}| against n.
    pub mixed_exponent: Option<f64>,
}

impl FluxModes {
    pub fn coefficient(&self, key: ModeKey) -> Option<f64> {
        ModeTable::key_index(&self.truncation, key).map(|i| self.coefficients[i])
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn g00(&self) -> f64 {
        self.coefficients[0]
    }

    /// Every fitted exponent sits at or below its bound (−1 in each case) plus slack.
    pub fn within_bounds(&self) -> bool {
        [self.angular_exponent, self.periodic_exponent, self.mixed_exponent]
            .iter()
            .all(|e| e.map_or(true, |e| e <= -1.0 + EXPONENT_SLACK))
    }
}

fn fit_nonzero(xs: &[f64], ys: &[f64], floor: f64) -> Option<f64> {
    let (fx, fy): (Vec<f64>, Vec<f64>) = xs.iter().zip(ys).filter(|(_, &y)| y > floor).map(|(&x, &y)| (x, y)).unzip();
    if fx.len() >= 3 {
        Some(math::fit_log_log(&fx, &fy))
    } else {
        None
    }
}

pub fn flux_modes(flux: &FluxData, trunc: &Truncation) -> Result<FluxModes, HomogeneousError> {
    let rule = AngularRule::with_counts(&flux.domain, trunc, flux.rule.thetas.len(), flux.rule.ys.len());
    let coefficients = if rule.thetas == flux.rule.thetas && rule.ys == flux.rule.ys {
        project_slab(&flux.domain, trunc, &rule, &flux.values).coeffs
    } else {
        return Err(SpectralError::InvalidGrid("flux was sampled for a smaller truncation").into());
    };
    let tolerance = COMPAT_TOLERANCE * flux.sup;
    if math::abs(coefficients[0]) > tolerance {
        return Err(HomogeneousError::CompatibilityViolation { g00: coefficients[0], tolerance });
    }
    let index = |m: usize, n: usize, parity: Parity| ModeTable::key_index(trunc, ModeKey { m, n, parity }).unwrap_or(0);
    let floor = 1e-12 * flux.sup.max(f64::MIN_POSITIVE);
    let orders: Vec<f64> = (1..=trunc.m_max).map(|m| flux.domain.angular_order(m)).collect();
    let angular: Vec<f64> = (1..=trunc.m_max).map(|m| math::abs(coefficients[index(m, 0, Parity::Cos)])).collect();
    let freqs: Vec<f64> = (1..=trunc.n_max).map(|n| n as f64).collect();
    let pair = |m: usize, n: usize| math::hypot(coefficients[index(m, n, Parity::Sin)], coefficients[index(m, n, Parity::Cos)]);
    let periodic: Vec<f64> = (1..=trunc.n_max).map(|n| pair(0, n)).collect();
    let mixed: Vec<f64> = (1..=trunc.n_max)
        .map(|n| (1..=trunc.m_max).map(|m| flux.domain.angular_order(m) * pair(m, n)).sum())
        .collect();
    Ok(FluxModes {
        truncation: *trunc,
        sup: flux.sup,
        angular_exponent: fit_nonzero(&orders, &angular, floor),
        periodic_exponent: fit_nonzero(&freqs, &periodic, floor),
        mixed_exponent: fit_nonzero(&freqs, &mixed, floor),
        coefficients,
    })
}

/// Closed-form radial profile of one homogeneous mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HomogeneousProfile {
    /// R̃₀₀, the edge-pinning constant.
    Constant(f64),
    /// (g/p)·L·(r/L)^p with p = √μ_m.
    Power { flux: f64, order: f64 },
    /// g·I_p(nr)/(n·I′_p(nL)), stored with ln I_p(nL) and I′/I at nL.
    Bessel { flux: f64, order: f64, freq: f64, ln_i_outer: f64, ratio_outer: f64 },
}

impl HomogeneousProfile {
    /// Value and first two r-derivatives; derivatives need r > 0.
    pub fn sample(&self, length: f64, r: f64) -> Result<RadialSample, HomogeneousError> {
        Ok(match *self {
            HomogeneousProfile::Constant(c) => RadialSample { value: c, d1: 0.0, d2: 0.0 },
            HomogeneousProfile::Power { flux, order } => {
                if flux == 0.0 {
                    return Ok(RadialSample::default());
                }
                let s = r / length;
                let scaled = if r == 0.0 { 0.0 } else { math::pow(s, order - 2.0) };
                RadialSample {
                    value: flux * length / order * scaled * s * s,
                    d1: flux * scaled * s,
                    d2: flux * (order - 1.0) / length * scaled,
                }
            }
            HomogeneousProfile::Bessel { flux, order, freq, ln_i_outer, ratio_outer } => {
                if flux == 0.0 {
                    return Ok(RadialSample::default());
                }
                let scale = flux / (freq * ratio_outer);
                if r == 0.0 {
                    let value = if order == 0.0 { scale * math::exp(-ln_i_outer) } else { 0.0 };
                    return Ok(RadialSample { value, d1: f64::NAN, d2: f64::NAN });
                }
                let inner = log_eval(order, freq * r)?;
                let value = scale * math::exp(inner.ln_i - ln_i_outer);
                let d1 = freq * inner.i_ratio * value;
                let d2 = -d1 / r + (order * order / (r * r) + freq * freq) * value;
                RadialSample { value, d1, d2 }
            }
        })
    }
}

/// W_L assembled from the closed-form modes.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousSolution {
    pub domain: WedgeDomain,
    pub truncation: Truncation,
    pub modes: FluxModes,
    keys: Vec<ModeKey>,
    profiles: Vec<HomogeneousProfile>,
}

pub fn solve_homogeneous(
    flux: &FluxData,
    domain: &WedgeDomain,
    trunc: &Truncation,
) -> Result<HomogeneousSolution, HomogeneousError> {
    if flux.domain != *domain {
        return Err(SpectralError::InvalidGrid("flux was sampled on a different domain").into());
    }
    let modes = flux_modes(flux, trunc)?;
    let keys = trunc.keys();
    let length = domain.length();
    let built = par::map_indexed(keys.len(), |i| -> Result<HomogeneousProfile, HomogeneousError> {
        let key = keys[i];
        let g = modes.coefficients[i];
        let order = domain.angular_order(key.m);
        Ok(match (key.m, key.n) {
            (0, 0) => HomogeneousProfile::Constant(0.0),
            (_, 0) => HomogeneousProfile::Power { flux: g, order },
            _ => {
                let freq = key.n as f64;
                let outer = log_eval(order, freq * length)?;
                HomogeneousProfile::Bessel { flux: g, order, freq, ln_i_outer: outer.ln_i, ratio_outer: outer.i_ratio }
            }
        })
    });
    let mut profiles = built.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut pin = 0.0;
    for (key, profile) in keys.iter().zip(&profiles) {
        if key.m == 0 && key.n > 0 && key.parity == Parity::Cos {
            pin -= profile.sample(length, 0.0)?.value;
        }
    }
    profiles[0] = HomogeneousProfile::Constant(pin);
    Ok(HomogeneousSolution { domain: *domain, truncation: *trunc, modes, keys, profiles })
}

/// Residuals of the assembled W_L, each scaled by sup|g|.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HomogeneousResiduals {
    /// Fourth-order finite-difference Laplacian, sup over the grid.
    pub laplace: f64,
    pub neumann_lower: f64,
    pub neumann_upper: f64,
    /// sup |∂_r W(L) − Σ g_key Φ_key|.
    pub outer: f64,
    /// sup_θ |W(0, θ, 0)|, absolute.
    pub edge: f64,
    /// |∫∫ ∂_r W(L) dθ dy₂|, absolute.
    pub mean_flux: f64,
}

impl HomogeneousSolution {
    pub fn keys(&self) -> &[ModeKey] {
        &self.keys
    }

    pub fn profiles(&self) -> &[HomogeneousProfile] {
        &self.profiles
    }

    pub fn profile(&self, key: ModeKey) -> Option<&HomogeneousProfile> {
        ModeTable::key_index(&self.truncation, key).map(|i| &self.profiles[i])
    }

    /// R̃₀₀.
    pub fn pin(&self) -> f64 {
        match self.profiles[0] {
            HomogeneousProfile::Constant(c) => c,
            _ => unreachable!("the first key is always (0, 0)"),
        }
    }

    pub fn radial_samples(&self, r: f64) -> Result<Vec<RadialSample>, HomogeneousError> {
        let length = self.domain.length();
        if !(r >= 0.0 && r <= length * (1.0 + 1e-12)) {
            return Err(SpectralError::OutOfDomain { r, theta: f64::NAN }.into());
        }
        self.profiles.iter().map(|p| p.sample(length, r)).collect()
    }

    pub fn combine(&self, samples: &[RadialSample], theta: f64, y2: f64, order: u8) -> FieldSample {
        combine_modes(&self.domain, &self.keys, samples, theta, y2, order)
    }

    /// W and its (r, θ, y₂) derivatives up to `order`.
    pub fn evaluate(&self, r: f64, theta: f64, y2: f64, order: u8) -> Result<FieldSample, HomogeneousError> {
        if !self.domain.contains(r, theta) {
            return Err(SpectralError::OutOfDomain { r, theta }.into());
        }
        if r == 0.0 && order > 0 {
            return Err(SpectralError::DerivativeAtEdge.into());
        }
        Ok(self.combine(&self.radial_samples(r)?, theta, y2, order))
    }

    /// Σ g_key Φ_key: the flux as the truncated series sees it.
    pub fn projected_flux(&self, theta: f64, y2: f64) -> f64 {
        let unit: Vec<RadialSample> =
            self.modes.coefficients.iter().map(|&g| RadialSample { value: g, d1: 0.0, d2: 0.0 }).collect();
        self.combine(&unit, theta, y2, 0).value
    }

    pub fn residuals(&self, counts: (usize, usize, usize)) -> Result<HomogeneousResiduals, HomogeneousError> {
        let (nr, nt, ny) = counts;
        let length = self.domain.length();
        let theta0 = self.domain.theta0();
        let width = self.domain.aperture();
        let step = 1e-3;
        let radii: Vec<f64> = (0..nr).map(|i| length * (i as f64 + 0.5) / nr as f64).collect();
        let thetas: Vec<f64> = (0..nt).map(|j| theta0 + width * (j as f64 + 0.5) / nt as f64).collect();
        let ys: Vec<f64> = (0..ny).map(|k| math::TAU * k as f64 / ny as f64).collect();
        let rows = par::map_slice(&radii, |&r| -> Result<[f64; 3], HomogeneousError> {
            let centre = self.radial_samples(r)?;
            let stencil: Vec<Vec<RadialSample>> =
                [-2.0, -1.0, 1.0, 2.0].iter().map(|k| self.radial_samples(r + k * step)).collect::<Result<_, _>>()?;
            let mut row = [0.0f64; 3];
            for &y in &ys {
                for &theta in &thetas {
                    let value = |samples: &[RadialSample], t: f64, yy: f64| self.combine(samples, t, yy, 0).value;
                    let v0 = value(&centre, theta, y);
                    let radial: Vec<f64> = stencil.iter().map(|s| value(s, theta, y)).collect();
                    let v_rr = (-radial[0] + 16.0 * radial[1] - 30.0 * v0 + 16.0 * radial[2] - radial[3]) / (12.0 * step * step);
                    let v_r = (radial[0] - 8.0 * radial[1] + 8.0 * radial[2] - radial[3]) / (12.0 * step);
                    let second = |f: &dyn Fn(f64) -> f64| {
                        (-f(2.0 * step) + 16.0 * f(step) - 30.0 * v0 + 16.0 * f(-step) - f(-2.0 * step)) / (12.0 * step * step)
                    };
                    let v_tt = second(&|e| value(&centre, theta + e, y));
                    let v_yy = second(&|e| value(&centre, theta, y + e));
                    row[0] = row[0].max(math::abs(v_rr + v_r / r + v_tt / (r * r) + v_yy));
                }
                row[1] = row[1].max(math::abs(self.combine(&centre, theta0, y, 1).gradient[1]));
                row[2] = row[2].max(math::abs(self.combine(&centre, math::FRAC_PI_2, y, 1).gradient[1]));
            }
            Ok(row)
        });
        let mut out = HomogeneousResiduals::default();
        for row in rows {
            let row = row?;
            out.laplace = out.laplace.max(row[0]);
            out.neumann_lower = out.neumann_lower.max(row[1]);
            out.neumann_upper = out.neumann_upper.max(row[2]);
        }
        let outer = self.radial_samples(length)?;
        let rule = AngularRule::with_counts(&self.domain, &self.truncation, nt.max(8), ny.max(8));
        let mut mean = 0.0;
        for (&theta, &w) in rule.thetas.iter().zip(&rule.theta_weights) {
            for &y in &rule.ys {
                let d_r = self.combine(&outer, theta, y, 1).gradient[0];
                mean += w * d_r * math::TAU / rule.ys.len() as f64;
                out.outer = out.outer.max(math::abs(d_r - self.projected_flux(theta, y)));
            }
        }
        out.mean_flux = math::abs(mean);
        let origin = self.radial_samples(0.0)?;
        for &theta in &thetas {
            out.edge = out.edge.max(math::abs(self.combine(&origin, theta, 0.0, 0).value));
        }
        let scale = self.modes.sup.max(f64::MIN_POSITIVE);
        out.laplace /= scale;
        out.neumann_lower /= scale;
        out.neumann_upper /= scale;
        out.outer /= scale;
        Ok(out)
    }
}

/// δ₁ ∈ (δ₀, 1), defaulting to δ₀ + 0.1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delta1(f64);

impl Delta1 {
    pub fn new(delta0: f64, delta1: Option<f64>) -> Result<Self, HomogeneousError> {
        let delta1 = delta1.unwrap_or(delta0 + 0.1);
        if !(delta1 > delta0 && delta1 < 1.0) {
            return Err(HomogeneousError::InvalidDelta1 { delta0, delta1 });
        }
        Ok(Self(delta1))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayOptions {
    pub theta0: f64,
    pub sweep: Vec<f64>,
    pub delta1: Delta1,
    pub truncation: Truncation,
    /// Radial sample counts on [10⁻³, 1] and [1, L], both geometric.
    pub radial_samples: (usize, usize),
    pub theta_samples: usize,
    pub y_samples: usize,
}

impl DecayOptions {
    pub fn new(theta0: f64, delta1: Delta1) -> Self {
        Self {
            theta0,
            sweep: vec![4.0, 8.0, 16.0, 32.0],
            delta1,
            truncation: Truncation { m_max: 8, n_max: 8 },
            radial_samples: (25, 41),
            theta_samples: 9,
            y_samples: 16,
        }
    }
}

/// Sampled size of W_L on one domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub length: f64,
    /// (0, −δ₁)-weighted sup: max of the two parts below.
    pub weighted_norm: f64,
    /// sup_{r ≤ 1} |W_L|.
    pub edge_part: f64,
    /// sup_{r ≥ 1} r^{−δ₁}|W_L|.
    pub far_part: f64,
    /// L^{1−δ₁}·sup|g|, the zeroth-order flux norm.
    pub flux_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub delta1: f64,
    pub rows: Vec<DecayRow>,
    /// Log-log slope of the weighted norm against L.
    pub fitted_rate: Option<f64>,
    pub edge_rate: Option<f64>,
    pub far_rate: Option<f64>,
    /// Trend down with at most one small upward step and a clearly negative rate.
    pub decays: bool,
    pub all_zero: bool,
}

/// True when the sequence falls at every step except at most one rise of ≤ `slack`.
pub fn decreasing_in_trend(values: &[f64], slack: f64) -> bool {
    let mut rises = 0;
    for w in values.windows(2) {
        if w[1] > w[0] {
            if w[1] > w[0] * (1.0 + slack) {
                return false;
            }
            rises += 1;
        }
    }
    rises <= 1
}

fn geometric(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (math::ln(lo), math::ln(hi));
    (0..count).map(|k| math::exp(a + (b - a) * k as f64 / (count - 1).max(1) as f64)).collect()
}

fn fit_positive(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if ys.iter().all(|&y| y > 0.0 && y.is_finite()) {
        Some(math::fit_log_log(xs, ys))
    } else {
        None
    }
}

/// Weighted sizes of W on a fixed plan: (sup_{r≤1}|W|, sup_{r≥1} r^{−δ₁}|W|).
pub fn weighted_parts(
    solution: &HomogeneousSolution,
    delta1: f64,
    options: &DecayOptions,
) -> Result<(f64, f64), HomogeneousError> {
    let length = solution.domain.length();
    let mut radii = vec![0.0];
    radii.extend(geometric(1e-3, 1.0, options.radial_samples.0));
    radii.extend(geometric(1.0, length, options.radial_samples.1).into_iter().skip(1));
    let theta0 = solution.domain.theta0();
    let nt = options.theta_samples.max(2);
    let thetas: Vec<f64> = (0..nt).map(|j| theta0 + solution.domain.aperture() * j as f64 / (nt - 1) as f64).collect();
    let ys: Vec<f64> = (0..options.y_samples).map(|k| math::TAU * k as f64 / options.y_samples as f64).collect();
    let per_radius = par::map_slice(&radii, |&r| -> Result<f64, HomogeneousError> {
        let samples = solution.radial_samples(r)?;
        let mut sup: f64 = 0.0;
        for &t in &thetas {
            for &y in &ys {
                sup = sup.max(math::abs(solution.combine(&samples, t, y, 0).value));
            }
        }
        Ok(sup)
    });
    let (mut edge, mut far) = (0.0f64, 0.0f64);
    for (&r, sup) in radii.iter().zip(per_radius) {
        let sup = sup?;
        if r <= 1.0 {
            edge = edge.max(sup);
        }
        if r >= 1.0 {
            far = far.max(math::pow(r, -delta1) * sup);
        }
    }
    Ok((edge, far))
}

/// Solve on each L of the sweep with the flux `family(L, θ, y₂)` and record the
/// weighted size of W_L.
pub fn decay_study<G>(family: &G, options: &DecayOptions) -> Result<DecayReport, HomogeneousError>
where
    G: Fn(f64, f64, f64) -> f64 + Sync,
{
    if options.sweep.len() < 2 || options.sweep.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(HomogeneousError::InvalidSweep);
    }
    let delta1 = options.delta1.value();
    let mut rows = Vec::with_capacity(options.sweep.len());
    for &length in &options.sweep {
        let domain = WedgeDomain::new(options.theta0, length)?;
        let flux = FluxData::sample(&|t: f64, y: f64| family(length, t, y), &domain, &options.truncation)?;
        let solution = solve_homogeneous(&flux, &domain, &options.truncation)?;
        let (edge_part, far_part) = weighted_parts(&solution, delta1, options)?;
        rows.push(DecayRow {
            length,
            weighted_norm: edge_part.max(far_part),
            edge_part,
            far_part,
            flux_norm: math::pow(length, 1.0 - delta1) * flux.sup_norm(),
        });
    }
    let lengths: Vec<f64> = rows.iter().map(|r| r.length).collect();
    let norms: Vec<f64> = rows.iter().map(|r| r.weighted_norm).collect();
    let edges: Vec<f64> = rows.iter().map(|r| r.edge_part).collect();
    let fars: Vec<f64> = rows.iter().map(|r| r.far_part).collect();
    let all_zero = norms.iter().all(|&v| v == 0.0);
    let fitted_rate = fit_positive(&lengths, &norms);
    let decays = all_zero
        || (decreasing_in_trend(&norms, TREND_SLACK) && fitted_rate.map_or(false, |rate| rate <= DECAY_RATE_CEILING));
    Ok(DecayReport {
        delta1,
        fitted_rate,
        edge_rate: fit_positive(&lengths, &edges),
        far_rate: fit_positive(&lengths, &fars),
        decays,
        all_zero,
        rows,
    })
}
