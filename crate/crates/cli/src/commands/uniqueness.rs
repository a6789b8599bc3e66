//! `uniqueness`: size of the homogeneous solution W_L as the cut radius grows.

use serde::Deserialize;
use serde_json::json;
use wedge_core::homogeneous::{
    decay_study, solve_homogeneous, DecayOptions, DecayReport, Delta1, FluxData, HomogeneousProfile,
};
use wedge_core::spectral::{Truncation, WedgeDomain};

use super::{failed, invalid};
use crate::config::{as_count, Named, Tolerances, TruncationPair};
use crate::output::{num, Artifact, Table};
use crate::{CliError, RunContext};

const TOLERANCES: &[(&str, f64)] = &[("residual", 1e-6)];

fn quarter_pi() -> f64 {
    std::f64::consts::FRAC_PI_4
}

fn default_lengths() -> Vec<f64> {
    vec![4.0, 8.0, 16.0, 32.0]
}

fn default_truncation() -> TruncationPair {
    TruncationPair(8, 8)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessConfig {
    #[serde(default = "quarter_pi")]
    pub theta0: f64,
    pub delta0: f64,
    /// Defaults to δ₀ + 0.1.
    #[serde(default)]
    pub delta1: Option<f64>,
    #[serde(default = "default_lengths")]
    pub lengths: Vec<f64>,
    #[serde(default = "default_truncation")]
    pub truncation: TruncationPair,
    pub family: Named,
    #[serde(default)]
    pub radial_samples: Option<(usize, usize)>,
    #[serde(default)]
    pub theta_samples: Option<usize>,
    #[serde(default)]
    pub y_samples: Option<usize>,
}

/// Flux families g_L = L^{δ₁−1}·shape(θ, y₂), each with zero mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// cos(√μ_m(θ−θ₀)).
    Angular { order: f64, theta0: f64 },
    /// sin(n y₂).
    Periodic { wavenumber: f64 },
    /// cos(√μ_m(θ−θ₀))·sin(n y₂).
    Mixed { order: f64, theta0: f64, wavenumber: f64 },
    Zero,
}

impl Family {
    pub fn parse(named: &Named, theta0: f64) -> Result<Self, CliError> {
        let order_of = |m: usize| -> Result<f64, CliError> {
            if m == 0 {
                return Err(invalid(format!("{}: mode must be at least 1", named.name)));
            }
            Ok(m as f64 * std::f64::consts::PI / (std::f64::consts::FRAC_PI_2 - theta0))
        };
        let wave = |n: usize| -> Result<f64, CliError> {
            if n == 0 {
                return Err(invalid(format!("{}: wavenumber must be at least 1", named.name)));
            }
            Ok(n as f64)
        };
        match named.name.as_str() {
            "angular" => {
                let p = named.params(&[("mode", 1.0)])?;
                Ok(Family::Angular { order: order_of(as_count("mode", p["mode"])?)?, theta0 })
            }
            "periodic" => {
                let p = named.params(&[("wavenumber", 1.0)])?;
                Ok(Family::Periodic { wavenumber: wave(as_count("wavenumber", p["wavenumber"])?)? })
            }
            "mixed" => {
                let p = named.params(&[("mode", 1.0), ("wavenumber", 1.0)])?;
                Ok(Family::Mixed {
                    order: order_of(as_count("mode", p["mode"])?)?,
                    theta0,
                    wavenumber: wave(as_count("wavenumber", p["wavenumber"])?)?,
                })
            }
            "zero" => {
                named.params(&[])?;
                Ok(Family::Zero)
            }
            other => Err(invalid(format!("unknown family {other:?}; expected angular, periodic, mixed or zero"))),
        }
    }

    pub fn flux(&self, delta1: f64, length: f64, theta: f64, y2: f64) -> f64 {
        let amplitude = length.powf(delta1 - 1.0);
        amplitude
            * match *self {
                Family::Angular { order, theta0 } => (order * (theta - theta0)).cos(),
                Family::Periodic { wavenumber } => (wavenumber * y2).sin(),
                Family::Mixed { order, theta0, wavenumber } => (order * (theta - theta0)).cos() * (wavenumber * y2).sin(),
                Family::Zero => 0.0,
            }
    }

    /// Growth exponent of the r ≤ 1 part implied by the closed form (r/L)^p.
    pub fn expected_edge_rate(&self, delta1: f64) -> Option<f64> {
        match *self {
            Family::Angular { order, .. } => Some(delta1 - order),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Plan {
    options: DecayOptions,
    family: Family,
    config: UniquenessConfig,
    tolerances: Tolerances,
}

impl Plan {
    pub fn from_config(ctx: &RunContext) -> Result<Self, CliError> {
        let config: UniquenessConfig = ctx.config.payload()?;
        let tolerances = ctx.config.resolve_tolerances(TOLERANCES)?;
        if !(config.delta0 > 0.0 && config.delta0 < 1.0) {
            return Err(invalid("delta0 must lie in (0, 1)"));
        }
        let delta1 = Delta1::new(config.delta0, config.delta1).map_err(invalid)?;
        if config.lengths.len() < 2 || config.lengths.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("lengths must be strictly ascending with at least two entries"));
        }
        for &l in &config.lengths {
            WedgeDomain::new(config.theta0, l).map_err(invalid)?;
        }
        let mut options = DecayOptions::new(config.theta0, delta1);
        options.sweep = config.lengths.clone();
        options.truncation = Truncation::new(config.truncation.0, config.truncation.1).map_err(invalid)?;
        if let Some(rs) = config.radial_samples {
            options.radial_samples = rs;
        }
        if let Some(t) = config.theta_samples {
            options.theta_samples = t;
        }
        if let Some(y) = config.y_samples {
            options.y_samples = y;
        }
        let (a, b) = options.radial_samples;
        if a < 2 || b < 2 || options.theta_samples < 2 || options.y_samples < 1 {
            return Err(invalid("sample counts too small"));
        }
        let family = Family::parse(&config.family, config.theta0)?;
        Ok(Self { options, family, config, tolerances })
    }

    pub fn study(&self) -> Result<DecayReport, CliError> {
        let d1 = self.options.delta1.value();
        let family = self.family;
        decay_study(&move |l: f64, t: f64, y: f64| family.flux(d1, l, t, y), &self.options).map_err(failed)
    }

    pub fn run(&self, ctx: &RunContext) -> Result<Vec<Artifact>, CliError> {
        let report = self.study()?;
        let d1 = report.delta1;
        let mut decay = Table::new(&["L", "weighted_norm", "fitted_rate", "edge_part", "far_part", "flux_norm"]);
        for row in &report.rows {
            decay.push(vec![
                row.length.into(),
                row.weighted_norm.into(),
                report.fitted_rate.into(),
                row.edge_part.into(),
                row.far_part.into(),
                row.flux_norm.into(),
            ]);
        }

        let mut modes = Table::new(&["L", "m", "n", "i", "flux", "profile", "order", "value_at_1", "value_at_L"]);
        let mut worst_residual = 0.0f64;
        let trunc = self.options.truncation;
        for &length in &self.options.sweep {
            let domain = WedgeDomain::new(self.config.theta0, length).map_err(invalid)?;
            let family = self.family;
            let flux =
                FluxData::sample(&move |t: f64, y: f64| family.flux(d1, length, t, y), &domain, &trunc).map_err(failed)?;
            let sol = solve_homogeneous(&flux, &domain, &trunc).map_err(failed)?;
            let res = sol.residuals((8, 5, 8)).map_err(failed)?;
            for v in [res.laplace, res.neumann_lower, res.neumann_upper, res.outer, res.edge, res.mean_flux] {
                worst_residual = worst_residual.max(v);
            }
            for (key, profile) in sol.keys().iter().zip(sol.profiles()) {
                let (kind, order) = match *profile {
                    HomogeneousProfile::Constant(_) => ("constant", 0.0),
                    HomogeneousProfile::Power { order, .. } => ("power", order),
                    HomogeneousProfile::Bessel { order, .. } => ("bessel", order),
                };
                let at = |r: f64| profile.sample(length, r).map(|s| s.value).map_err(failed);
                modes.push(vec![
                    length.into(),
                    key.m.into(),
                    key.n.into(),
                    key.parity.index().into(),
                    sol.modes.coefficient(*key).into(),
                    kind.into(),
                    order.into(),
                    at(1.0)?.into(),
                    at(length)?.into(),
                ]);
            }
        }

        let expected = self.family.expected_edge_rate(d1);
        let body = json!({
            "inputs": {
                "theta0": self.config.theta0, "delta0": self.config.delta0, "delta1": d1,
                "lengths": self.options.sweep, "family": self.config.family.name,
                "truncation": [trunc.m_max, trunc.n_max],
            },
            "fitted_rate": report.fitted_rate.map(num),
            "edge_rate": report.edge_rate.map(num),
            "far_rate": report.far_rate.map(num),
            "expected_edge_rate": expected.map(num),
            "edge_rate_relative_error": match (report.edge_rate, expected) {
                (Some(m), Some(e)) => Some(num(((m - e) / e).abs())),
                _ => None,
            },
            "decays": report.decays,
            "all_zero": report.all_zero,
            "max_solution_residual": num(worst_residual),
            "tolerances": self.tolerances.to_json(),
        });
        if worst_residual > self.tolerances.get("residual") {
            return Err(CliError::numerical("homogeneous solutions fail their residual checks", body));
        }
        Ok(vec![
            Artifact::csv("decay.csv", &decay, &ctx.header)?,
            Artifact::csv("homogeneous_modes.csv", &modes, &ctx.header)?,
            Artifact::json("uniqueness.json", body, &ctx.header),
        ])
    }
}
