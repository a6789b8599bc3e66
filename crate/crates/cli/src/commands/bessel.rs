//! `bessel-check`: seeded bound suite, Wronskian grid and large-order check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;
use wedge_core::bessel::{
    calibrate_c_m, check_bound, eta_gap, ln_i_series, ln_k_quadrature, log_eval, log_eval_quadrature,
    uniform_large_order, Bound, BoundCheck, CmCalibration, LogBessel, MARGIN_FLOOR,
};

use super::{failed, invalid};
use crate::config::Tolerances;
use crate::output::{num, Artifact, Table};
use crate::{CliError, RunContext};

const TOLERANCES: &[(&str, f64)] = &[("wronskian", 1e-9), ("uniform", 1e-4), ("cross_check", 1e-12)];

/// Number of evenly spaced orders on ν ∈ (½, M] used to calibrate C_M at t = 1.
const CALIBRATION_ORDERS: usize = 64;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleConfig {
    /// Points per hypothesis region.
    pub count: usize,
    pub nu_max: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Order cap M of the large-argument K bound.
    pub m_cap: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { count: 10_000, nu_max: 200.0, t_min: 1e-3, t_max: 700.0, m_cap: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub nu_max: f64,
    pub nu_count: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_count: usize,
    /// Also evaluate every grid point from the integral representations.
    pub quadrature: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { nu_max: 60.0, nu_count: 31, t_min: 0.01, t_max: 100.0, t_count: 25, quadrature: true }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UniformConfig {
    pub order: f64,
    /// Scaled arguments z; the check runs at t = ν·z.
    pub scaled_arguments: Vec<f64>,
}

impl Default for UniformConfig {
    fn default() -> Self {
        Self { order: 50.0, scaled_arguments: vec![0.1, 0.5, 1.0, 2.0, 5.0] }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BesselConfig {
    pub samples: SampleConfig,
    pub grid: GridConfig,
    pub uniform: UniformConfig,
}

/// Hypothesis regions of the bound suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    ZeroOrderI,
    ZeroOrderK,
    SmallArgumentI,
    SmallArgumentK,
    LargeArgumentI,
    LargeArgumentK,
    EtaGap,
}

impl Region {
    pub const ALL: [Region; 7] = [
        Region::ZeroOrderI,
        Region::ZeroOrderK,
        Region::SmallArgumentI,
        Region::SmallArgumentK,
        Region::LargeArgumentI,
        Region::LargeArgumentK,
        Region::EtaGap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Region::ZeroOrderI => "zero_order_i",
            Region::ZeroOrderK => "zero_order_k",
            Region::SmallArgumentI => "small_argument_i",
            Region::SmallArgumentK => "small_argument_k",
            Region::LargeArgumentI => "large_argument_i",
            Region::LargeArgumentK => "large_argument_k",
            Region::EtaGap => "eta_gap",
        }
    }

    fn stream(self) -> u64 {
        Region::ALL.iter().position(|r| *r == self).expect("listed") as u64 + 1
    }
}

/// One sampled point: (ν, t) plus t₂ ≥ t for the η-gap region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub nu: f64,
    pub t: f64,
    pub t2: Option<f64>,
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.gen::<f64>()).exp().clamp(lo, hi)
}

/// Uniform on the half-open interval (lo, hi].
fn open_below(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    hi - (hi - lo) * rng.gen::<f64>()
}

/// Seeded sample of one region; each region draws from its own stream.
pub fn region_samples(region: Region, cfg: &SampleConfig, seed: u64) -> Vec<SamplePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(region.stream());
    let below_one = 1.0 - f64::EPSILON;
    (0..cfg.count)
        .map(|_| match region {
            Region::ZeroOrderI | Region::ZeroOrderK => {
                SamplePoint { nu: 0.0, t: log_uniform(&mut rng, cfg.t_min, cfg.t_max), t2: None }
            }
            Region::SmallArgumentI | Region::SmallArgumentK => SamplePoint {
                nu: open_below(&mut rng, 0.5, cfg.nu_max),
                t: log_uniform(&mut rng, cfg.t_min, below_one),
                t2: None,
            },
            Region::LargeArgumentI => SamplePoint {
                nu: open_below(&mut rng, 0.5, cfg.nu_max),
                t: log_uniform(&mut rng, 1.0, cfg.t_max),
                t2: None,
            },
            Region::LargeArgumentK => SamplePoint {
                nu: open_below(&mut rng, 0.5, cfg.m_cap),
                t: log_uniform(&mut rng, 1.0, cfg.t_max),
                t2: None,
            },
            Region::EtaGap => {
                let nu = open_below(&mut rng, 0.0, cfg.nu_max);
                let a = log_uniform(&mut rng, cfg.t_min, cfg.t_max);
                let b = log_uniform(&mut rng, cfg.t_min, cfg.t_max);
                SamplePoint { nu, t: a.min(b), t2: Some(a.max(b)) }
            }
        })
        .collect()
}

/// C_M from the orders ν_k = ½ + (M − ½)k/64, k = 1..=64, at t = 1. The
/// quotient K_ν(t)√(2t/π)eᵗ grows with ν and falls with t for ν > ½, so the
/// corner (M, 1) of the region attains its supremum.
pub fn calibrate(m_cap: f64) -> Result<CmCalibration, CliError> {
    let points: Vec<(f64, f64)> = (1..=CALIBRATION_ORDERS)
        .map(|k| (0.5 + (m_cap - 0.5) * k as f64 / CALIBRATION_ORDERS as f64, 1.0))
        .collect();
    calibrate_c_m(m_cap, &points).map_err(failed)
}

pub fn check_point(region: Region, p: SamplePoint, calibration: &CmCalibration) -> Result<BoundCheck, CliError> {
    let bound = match region {
        Region::ZeroOrderI => Bound::ZeroOrderI,
        Region::ZeroOrderK => Bound::ZeroOrderK,
        Region::SmallArgumentI => Bound::SmallArgumentI,
        Region::SmallArgumentK => Bound::SmallArgumentK,
        Region::LargeArgumentI => Bound::LargeArgumentI,
        Region::LargeArgumentK => Bound::LargeArgumentK { m_cap: calibration.m_cap, c_m: calibration.c_m },
        Region::EtaGap => return eta_gap(p.nu, p.t, p.t2.expect("η-gap samples carry t₂")).map_err(failed),
    };
    check_bound(bound, p.nu, p.t).map_err(failed)
}

/// Aggregate over one region's sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSummary {
    pub region: Region,
    pub samples: usize,
    pub violations: usize,
    pub min_margin: f64,
    pub worst: SamplePoint,
}

pub fn summarize_region(
    region: Region,
    cfg: &SampleConfig,
    seed: u64,
    calibration: &CmCalibration,
) -> Result<RegionSummary, CliError> {
    let points = region_samples(region, cfg, seed);
    let checks: Vec<BoundCheck> =
        points.par_iter().map(|p| check_point(region, *p, calibration)).collect::<Result<_, _>>()?;
    let mut summary =
        RegionSummary { region, samples: points.len(), violations: 0, min_margin: f64::INFINITY, worst: points[0] };
    for (p, c) in points.iter().zip(&checks) {
        if !c.holds {
            summary.violations += 1;
        }
        if c.relative_margin < summary.min_margin {
            summary.min_margin = c.relative_margin;
            summary.worst = *p;
        }
    }
    Ok(summary)
}

/// Wronskian and cross-check at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub nu: f64,
    pub t: f64,
    pub production: LogBessel,
    pub quadrature: Option<LogBessel>,
}

impl GridPoint {
    /// t·|I K′ − I′ K + 1/t| on the production path.
    pub fn scaled_residual(&self) -> f64 {
        self.production.wronskian_residual(self.t) * self.t
    }

    pub fn scaled_quadrature_residual(&self) -> Option<f64> {
        self.quadrature.map(|q| q.wronskian_residual(self.t) * self.t)
    }

    /// Largest relative disagreement of ln I, ln K between the two paths.
    pub fn cross_check(&self) -> Option<f64> {
        self.quadrature.map(|q| {
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
            rel(self.production.ln_i, q.ln_i).max(rel(self.production.ln_k, q.ln_k))
        })
    }
}

pub fn wronskian_grid(cfg: &GridConfig) -> Result<Vec<GridPoint>, CliError> {
    let mut points = Vec::with_capacity(cfg.nu_count * cfg.t_count);
    for i in 0..cfg.nu_count {
        let nu = cfg.nu_max * i as f64 / (cfg.nu_count - 1) as f64;
        for j in 0..cfg.t_count {
            let t = cfg.t_min * (cfg.t_max / cfg.t_min).powf(j as f64 / (cfg.t_count - 1) as f64);
            points.push((nu, t));
        }
    }
    points
        .par_iter()
        .map(|&(nu, t)| {
            let production = log_eval(nu, t).map_err(failed)?;
            let quadrature = if cfg.quadrature { Some(log_eval_quadrature(nu, t).map_err(failed)?) } else { None };
            Ok(GridPoint { nu, t, production, quadrature })
        })
        .collect()
}

/// Three-term large-order values against series (I) and quadrature (K).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformPoint {
    pub nu: f64,
    pub z: f64,
    pub i_rel_err: f64,
    pub k_rel_err: f64,
}

pub fn uniform_check(cfg: &UniformConfig) -> Result<Vec<UniformPoint>, CliError> {
    cfg.scaled_arguments
        .iter()
        .map(|&z| {
            let t = cfg.order * z;
            let approx = uniform_large_order(cfg.order, z).map_err(failed)?;
            let ln_i = ln_i_series(cfg.order, t).map_err(failed)?.ln;
            let ln_k = ln_k_quadrature(cfg.order, t).map_err(failed)?.ln;
            // Compare in log form so nothing overflows: |approx/exact − 1|.
            let i_rel_err = (approx.i_approx.ln() - ln_i).exp_m1().abs();
            let k_rel_err = (approx.k_approx.ln() - ln_k).exp_m1().abs();
            Ok(UniformPoint { nu: cfg.order, z, i_rel_err, k_rel_err })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Plan {
    config: BesselConfig,
    tolerances: Tolerances,
}

impl Plan {
    pub fn from_config(ctx: &RunContext) -> Result<Self, CliError> {
        let config: BesselConfig = ctx.config.payload()?;
        let tolerances = ctx.config.resolve_tolerances(TOLERANCES)?;
        let s = &config.samples;
        if s.count == 0 {
            return Err(invalid("samples.count must be positive"));
        }
        if !(s.t_min > 0.0 && s.t_min < 1.0 && s.t_max > 1.0 && s.t_max.is_finite()) {
            return Err(invalid("samples need 0 < t_min < 1 < t_max"));
        }
        if !(s.nu_max > 0.5 && s.nu_max.is_finite() && s.m_cap > 0.5 && s.m_cap.is_finite()) {
            return Err(invalid("samples need nu_max > 1/2 and m_cap > 1/2"));
        }
        let g = &config.grid;
        if g.nu_count < 2 || g.t_count < 2 || !(g.nu_max >= 0.0) || !(g.t_min > 0.0 && g.t_max > g.t_min) {
            return Err(invalid("grid needs two or more points per axis, nu_max >= 0 and 0 < t_min < t_max"));
        }
        let u = &config.uniform;
        if !(u.order > 0.0) || u.scaled_arguments.iter().any(|z| !(*z > 0.0 && z.is_finite())) {
            return Err(invalid("uniform check needs a positive order and positive scaled arguments"));
        }
        Ok(Self { config, tolerances })
    }

    pub fn run(&self, ctx: &RunContext) -> Result<Vec<Artifact>, CliError> {
        let calibration = calibrate(self.config.samples.m_cap)?;
        let regions: Vec<RegionSummary> = Region::ALL
            .iter()
            .map(|&r| summarize_region(r, &self.config.samples, ctx.seed, &calibration))
            .collect::<Result<_, _>>()?;
        let mut bounds = Table::new(&["bound", "samples", "violations", "min_margin", "worst_nu", "worst_t", "worst_t2"]);
        for s in &regions {
            bounds.push(vec![
                s.region.name().into(),
                s.samples.into(),
                s.violations.into(),
                s.min_margin.into(),
                s.worst.nu.into(),
                s.worst.t.into(),
                s.worst.t2.into(),
            ]);
        }

        let grid = wronskian_grid(&self.config.grid)?;
        let mut values = Table::new(&["nu", "t", "I", "K", "Iprime", "Kprime", "method", "wronskian_residual"]);
        for p in &grid {
            let l = &p.production;
            let (i, k) = (l.ln_i.exp(), l.ln_k.exp());
            values.push(vec![
                p.nu.into(),
                p.t.into(),
                i.into(),
                k.into(),
                (i * l.i_ratio).into(),
                (k * l.k_ratio).into(),
                l.method.as_str().into(),
                l.wronskian_residual(p.t).into(),
            ]);
        }
        let max_of = |f: &dyn Fn(&GridPoint) -> Option<f64>| grid.iter().filter_map(f).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
        let wronskian_max = max_of(&|p| Some(p.scaled_residual())).unwrap_or(0.0);
        let quadrature_max = max_of(&|p| p.scaled_quadrature_residual());
        let cross_max = max_of(&|p| p.cross_check());

        let uniform = uniform_check(&self.config.uniform)?;
        let uniform_max = uniform.iter().fold(0.0f64, |m, u| m.max(u.i_rel_err).max(u.k_rel_err));

        let violations: usize = regions.iter().map(|s| s.violations).sum();
        let wronskian_ok = wronskian_max <= self.tolerances.get("wronskian")
            && quadrature_max.map_or(true, |q| q <= self.tolerances.get("wronskian"))
            && cross_max.map_or(true, |c| c <= self.tolerances.get("cross_check"));
        let uniform_ok = uniform_max <= self.tolerances.get("uniform");
        let body = json!({
            "bounds": regions.iter().map(|s| json!({
                "bound": s.region.name(), "samples": s.samples, "violations": s.violations,
                "min_margin": num(s.min_margin), "margin_floor": MARGIN_FLOOR,
            })).collect::<Vec<_>>(),
            "c_m": {
                "m_cap": calibration.m_cap, "c_m": num(calibration.c_m),
                "c_m_explicit": num(calibration.c_m_explicit),
                "worst_pointwise_fraction": num(calibration.worst_pointwise_fraction),
            },
            "wronskian": {
                "points": grid.len(),
                "max_scaled_residual": num(wronskian_max),
                "max_scaled_residual_quadrature": quadrature_max.map(num),
                "max_log_disagreement": cross_max.map(num),
            },
            "uniform": uniform.iter().map(|u| json!({
                "nu": u.nu, "z": u.z, "i_rel_err": num(u.i_rel_err), "k_rel_err": num(u.k_rel_err),
            })).collect::<Vec<_>>(),
            "passes": { "bounds": violations == 0, "wronskian": wronskian_ok, "uniform": uniform_ok },
            "tolerances": self.tolerances.to_json(),
        });
        if violations > 0 || !wronskian_ok || !uniform_ok {
            return Err(CliError::numerical("Bessel checks failed", body));
        }
        Ok(vec![
            Artifact::csv("bessel_check.csv", &values, &ctx.header)?,
            Artifact::csv("bessel_bounds.csv", &bounds, &ctx.header)?,
            Artifact::json("bessel_summary.json", body, &ctx.header),
        ])
    }
}
