//! `solve`: cut-off Laplace–Neumann problem for a named source.

use serde::Deserialize;
use serde_json::{json, Value};
use wedge_core::spectral::{
    assemble, solve_cutoff, tail_diagnostics, CutoffOptions, ResidualReport, SeriesSolution, Source, TailReport,
    Truncation, WedgeDomain, WeightExponents, ZeroDatum,
};

use super::{failed, invalid};
use crate::config::{as_count, Named, Tolerances, TruncationPair, Weights};
use crate::output::{num, nums, Artifact, Table};
use crate::{CliError, RunContext};

const TOLERANCES: &[(&str, f64)] = &[("pde", 1e-6), ("bc", 1e-7), ("edge", 1e-9), ("match", 1e-6)];

fn quarter_pi() -> f64 {
    std::f64::consts::FRAC_PI_4
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default = "quarter_pi")]
    pub theta0: f64,
    pub length: f64,
    #[serde(default = "default_truncation")]
    pub truncation: TruncationPair,
    #[serde(default)]
    pub weights: Weights,
    pub source: Named,
    /// Output grid (n_r, n_θ, n_y) of cell-centred points.
    #[serde(default = "default_verification")]
    pub verification: (usize, usize, usize),
    #[serde(default = "default_residual_grid")]
    pub residual_grid: (usize, usize, usize),
    /// Repeat the solve at doubled truncation and report tail movement.
    #[serde(default)]
    pub doubling_check: bool,
}

fn default_truncation() -> TruncationPair {
    TruncationPair(16, 16)
}

fn default_verification() -> (usize, usize, usize) {
    (20, 10, 16)
}

fn default_residual_grid() -> (usize, usize, usize) {
    (12, 6, 8)
}

/// Sources with a known exact solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedSource {
    /// f = Δw for w = r⁴(L−r)²·cos(√μ_m(θ−θ₀))·cos(n y₂).
    Manufactured { order: f64, wavenumber: f64, theta0: f64, length: f64 },
    /// f ≡ c, solved by c r²/4 with c_L = cL/2.
    Constant(f64),
    Zero,
}

impl NamedSource {
    pub fn parse(named: &Named, domain: &WedgeDomain) -> Result<Self, CliError> {
        match named.name.as_str() {
            "manufactured" => {
                let p = named.params(&[("mode", 1.0), ("wavenumber", 1.0)])?;
                let m = as_count("mode", p["mode"])?;
                if m == 0 {
                    return Err(invalid("manufactured: mode must be at least 1"));
                }
                Ok(NamedSource::Manufactured {
                    order: domain.angular_order(m),
                    wavenumber: as_count("wavenumber", p["wavenumber"])? as f64,
                    theta0: domain.theta0(),
                    length: domain.length(),
                })
            }
            "constant" => {
                let p = named.params(&[("value", 1.0)])?;
                if !p["value"].is_finite() {
                    return Err(invalid("constant: value must be finite"));
                }
                Ok(NamedSource::Constant(p["value"]))
            }
            "zero" => {
                named.params(&[])?;
                Ok(NamedSource::Zero)
            }
            other => Err(invalid(format!("unknown source {other:?}; expected manufactured, constant or zero"))),
        }
    }

    fn radial(length: f64, r: f64) -> (f64, f64, f64) {
        let s = length - r;
        (
            r.powi(4) * s * s,
            4.0 * r.powi(3) * s * s - 2.0 * r.powi(4) * s,
            12.0 * r * r * s * s - 16.0 * r.powi(3) * s + 2.0 * r.powi(4),
        )
    }

    pub fn exact(&self, r: f64, theta: f64, y2: f64) -> f64 {
        match *self {
            NamedSource::Manufactured { order, wavenumber, theta0, length } => {
                Self::radial(length, r).0 * (order * (theta - theta0)).cos() * (wavenumber * y2).cos()
            }
            NamedSource::Constant(c) => c * r * r / 4.0,
            NamedSource::Zero => 0.0,
        }
    }
}

impl Source for NamedSource {
    fn value(&self, r: f64, theta: f64, y2: f64) -> f64 {
        match *self {
            NamedSource::Manufactured { order, wavenumber, theta0, length } => {
                let (w, w1, w2) = Self::radial(length, r);
                let radial = w2 + w1 / r - (order * order / (r * r) + wavenumber * wavenumber) * w;
                radial * (order * (theta - theta0)).cos() * (wavenumber * y2).cos()
            }
            NamedSource::Constant(c) => c,
            NamedSource::Zero => 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Plan {
    domain: WedgeDomain,
    truncation: Truncation,
    weights: WeightExponents,
    source: NamedSource,
    config: SolveConfig,
    tolerances: Tolerances,
}

fn positive_counts(name: &str, c: (usize, usize, usize)) -> Result<(), CliError> {
    if c.0 == 0 || c.1 == 0 || c.2 == 0 {
        return Err(invalid(format!("{name} counts must be positive")));
    }
    Ok(())
}

impl Plan {
    pub fn from_config(ctx: &RunContext) -> Result<Self, CliError> {
        let config: SolveConfig = ctx.config.payload()?;
        let tolerances = ctx.config.resolve_tolerances(TOLERANCES)?;
        let domain = WedgeDomain::new(config.theta0, config.length).map_err(invalid)?;
        let truncation = Truncation::new(config.truncation.0, config.truncation.1).map_err(invalid)?;
        let w = config.weights;
        let weights = WeightExponents::new(&domain, w.delta, w.delta0, w.alpha).map_err(invalid)?;
        let source = NamedSource::parse(&config.source, &domain)?;
        positive_counts("verification", config.verification)?;
        positive_counts("residual_grid", config.residual_grid)?;
        Ok(Self { domain, truncation, weights, source, config, tolerances })
    }

    fn solve(&self, trunc: &Truncation) -> Result<SeriesSolution, CliError> {
        solve_cutoff(&self.source, &ZeroDatum, &ZeroDatum, &self.domain, trunc, &CutoffOptions::default())
            .map_err(failed)
    }

    pub fn run(&self, ctx: &RunContext) -> Result<Vec<Artifact>, CliError> {
        let series = self.solve(&self.truncation)?;
        let doubled = if self.config.doubling_check { Some(self.solve(&self.truncation.doubled())?) } else { None };
        let tails = tail_diagnostics(&series, doubled.as_ref(), &self.weights).map_err(failed)?;
        let report = series.residuals(Some(&self.source), self.config.residual_grid).map_err(failed)?;

        let (nr, nt, ny) = self.config.verification;
        let length = self.domain.length();
        let theta0 = self.domain.theta0();
        let radii: Vec<f64> = (0..nr).map(|i| length * (i as f64 + 0.5) / nr as f64).collect();
        let thetas: Vec<f64> = (0..nt).map(|j| theta0 + self.domain.aperture() * (j as f64 + 0.5) / nt as f64).collect();
        let ys: Vec<f64> = (0..ny).map(|k| std::f64::consts::TAU * k as f64 / ny as f64).collect();

        let mut solution = Table::new(&[
            "r", "theta", "y2", "value", "grad_r", "grad_theta", "grad_y2", "exact", "error",
        ]);
        let mut modes = Table::new(&["m", "n", "i", "r", "R_value"]);
        let (mut max_error, mut exact_scale) = (0.0f64, 0.0f64);
        for &r in &radii {
            let samples = series.radial_samples(r).map_err(failed)?;
            for (key, s) in series.keys().iter().zip(&samples) {
                modes.push(vec![key.m.into(), key.n.into(), key.parity.index().into(), r.into(), s.value.into()]);
            }
            for &theta in &thetas {
                for &y in &ys {
                    let f = series.combine(&samples, theta, y, 1);
                    let exact = self.source.exact(r, theta, y);
                    let error = f.value - exact;
                    max_error = max_error.max(error.abs());
                    exact_scale = exact_scale.max(exact.abs());
                    solution.push(vec![
                        r.into(),
                        theta.into(),
                        y.into(),
                        f.value.into(),
                        f.gradient[0].into(),
                        f.gradient[1].into(),
                        f.gradient[2].into(),
                        exact.into(),
                        error.into(),
                    ]);
                }
            }
        }
        // Pinned edge value against the exact field's edge value.
        let edge_exact = self.source.exact(0.0, theta0, 0.0);
        let edge_value = assemble(&series, 0.0, theta0, 0.0, 0).map_err(failed)?.value;
        let relative_error = if exact_scale > 0.0 { max_error / exact_scale } else { max_error };

        let bc_ok = [report.neumann_lower, report.neumann_upper, report.outer].iter().all(|&v| v <= self.tolerances.get("bc"));
        let checks = json!({
            "pde": report.pde <= self.tolerances.get("pde") && report.pde_fd <= self.tolerances.get("pde"),
            "bc": bc_ok,
            "edge": report.edge <= self.tolerances.get("edge"),
            "match": relative_error <= self.tolerances.get("match"),
        });
        let passes = checks.as_object().expect("object").values().all(|v| v.as_bool() == Some(true));
        let body = json!({
            "status": if passes { "ok" } else { "numerical_failure" },
            "inputs": {
                "theta0": theta0, "length": length,
                "truncation": [self.truncation.m_max, self.truncation.n_max],
                "source": self.config.source.name,
            },
            "residuals": residual_json(&report),
            "c_l": num(series.c_l),
            "pinned_edge_value": num(series.pinned_edge_value),
            "edge_value": num(edge_value),
            "edge_value_exact": num(edge_exact),
            "edge_identity_residuals": nums(&series.edge_identity_residuals()),
            "source_sup": num(series.source_sup),
            "energy_loss": num(series.energy_loss),
            "verification": { "points": nr * nt * ny, "max_error": num(max_error), "exact_scale": num(exact_scale), "relative_error": num(relative_error) },
            "tails": tail_json(&tails),
            "checks": checks,
            "passes": passes,
            "tolerances": self.tolerances.to_json(),
        });
        if !passes {
            return Err(CliError::numerical("solution fails its residual checks", body));
        }
        Ok(vec![
            Artifact::csv("solution.csv", &solution, &ctx.header)?,
            Artifact::csv("modes.csv", &modes, &ctx.header)?,
            Artifact::json("diagnostics.json", body, &ctx.header),
        ])
    }
}

fn residual_json(r: &ResidualReport) -> Value {
    json!({
        "pde": num(r.pde), "pde_fd": num(r.pde_fd),
        "neumann_lower": num(r.neumann_lower), "neumann_upper": num(r.neumann_upper),
        "outer": num(r.outer), "edge": num(r.edge),
        "sup_value": num(r.sup_value), "sup_gradient": num(r.sup_gradient),
    })
}

fn tail_json(t: &TailReport) -> Value {
    json!({
        "all_zero": t.all_zero,
        "angular_sup_inner": num(t.angular_sup_inner),
        "angular_outer_exponent": t.angular_outer_exponent.map(num),
        "periodic_edge_exponent": t.periodic_edge_exponent.map(num),
        "mixed_edge_exponent": t.mixed_edge_exponent.map(num),
        "expected_angular_outer": num(t.expected_angular_outer),
        "expected_periodic_edge": num(t.expected_periodic_edge),
        "expected_mixed_edge": num(t.expected_mixed_edge),
        "within_bounds": t.within_bounds,
        "doubling_change": t.doubling_change.map(num),
        "truncation_insufficient": t.truncation_insufficient,
    })
}
