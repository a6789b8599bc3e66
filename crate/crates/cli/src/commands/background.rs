//! `background`: the uniform downstream state, with an optional q₀ sweep.

use serde::Deserialize;
use serde_json::{json, Value};
use wedge_core::shockstate::{
    asymptotic_background, converges_in_trend, solve_background, BackgroundState, GasParams, LeadingOrder,
    SolverPath, UpstreamState, WedgeGeometry,
};

use super::{failed, invalid};
use crate::config::Tolerances;
use crate::output::{num, Artifact, Cell, Table};
use crate::{CliError, RunContext};

const TOLERANCES: &[(&str, f64)] = &[("residual", 1e-12), ("trend_slack", 0.05)];

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasConfig {
    pub gamma: f64,
    #[serde(default = "one")]
    pub a_const: f64,
    #[serde(default = "one")]
    pub rho0: f64,
}

impl GasConfig {
    pub fn build(&self) -> Result<GasParams, CliError> {
        GasParams::new(self.gamma, self.a_const, self.rho0).map_err(invalid)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundConfig {
    pub gas: GasConfig,
    pub q0: f64,
    pub b0: f64,
    /// Ascending q₀ values; each row reports whether the strong branch exists.
    #[serde(default)]
    pub sweep: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Plan {
    config: BackgroundConfig,
    gas: GasParams,
    geometry: WedgeGeometry,
    tolerances: Tolerances,
}

impl Plan {
    pub fn from_config(ctx: &RunContext) -> Result<Self, CliError> {
        let config: BackgroundConfig = ctx.config.payload()?;
        let tolerances = ctx.config.resolve_tolerances(TOLERANCES)?;
        let gas = config.gas.build()?;
        let geometry = WedgeGeometry::new(config.b0).map_err(invalid)?;
        UpstreamState::new(&gas, config.q0).map_err(invalid)?;
        if let Some(sweep) = &config.sweep {
            if sweep.is_empty() || sweep.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(invalid("sweep must be a non-empty strictly ascending list"));
            }
            for &q in sweep {
                UpstreamState::new(&gas, q).map_err(invalid)?;
            }
        }
        Ok(Self { config, gas, geometry, tolerances })
    }

    pub fn run(&self, ctx: &RunContext) -> Result<Vec<Artifact>, CliError> {
        let q0 = self.config.q0;
        let state = solve_background(&self.gas, q0, &self.geometry).map_err(failed)?;
        let leading = asymptotic_background(&self.gas, q0, &self.geometry);
        let checks = Checks::evaluate(&self.gas, &self.geometry, &state, self.tolerances.get("residual"));
        let mut body = json!({
            "inputs": {
                "gamma": self.gas.gamma(), "a_const": self.gas.a_const(), "rho0": self.gas.rho0(),
                "q0": q0, "b0": self.config.b0,
            },
            "state": state_json(&state),
            "residuals": { "scaled": state.residuals.iter().map(|&r| num(r)).collect::<Vec<_>>(), "max": num(state.residual) },
            "asymptotic_comparison": comparison_json(&state, &leading),
            "checks": checks.to_json(),
            "solver_path": match state.path { SolverPath::Newton => "newton", SolverPath::Bisection => "bisection" },
            "weak_branch": state.weak_branch.as_ref().map(|w| json!({
                "s0": num(w.s0), "alpha": num(w.alpha), "downstream_mach_sq": num(w.downstream_mach_sq),
            })),
            "tolerances": self.tolerances.to_json(),
        });
        if !checks.all() {
            return Err(CliError::numerical("background state fails its admissibility checks", body));
        }
        let mut artifacts = Vec::new();
        if let Some(sweep) = &self.config.sweep {
            let (table, summary) = self.sweep(sweep);
            body["sweep"] = summary;
            artifacts.push(Artifact::csv("background_sweep.csv", &table, &ctx.header)?);
        }
        artifacts.insert(0, Artifact::json("background.json", body, &ctx.header));
        Ok(artifacts)
    }

    fn sweep(&self, q0s: &[f64]) -> (Table, Value) {
        let mut table = Table::new(&[
            "q0", "attached", "s0", "alpha", "rho_plus", "u1_plus", "u3_plus", "c_plus_sq", "residual", "s0_leading",
            "s0_ratio",
        ]);
        let mut ratios = Vec::new();
        let mut smallest = None;
        let mut failures = Vec::new();
        for &q0 in q0s {
            let leading = asymptotic_background(&self.gas, q0, &self.geometry);
            match solve_background(&self.gas, q0, &self.geometry) {
                Ok(s) => {
                    smallest.get_or_insert(q0);
                    let ratio = s.s0 / leading.s0;
                    ratios.push(ratio);
                    table.push(vec![
                        q0.into(), 1usize.into(), s.s0.into(), s.alpha.into(), s.rho_plus.into(), s.u1_plus.into(),
                        s.u3_plus.into(), s.c_plus_sq.into(), s.residual.into(), leading.s0.into(), ratio.into(),
                    ]);
                }
                Err(e) => {
                    failures.push(json!({ "q0": q0, "error": e.to_string() }));
                    let mut row: Vec<Cell> = vec![q0.into(), 0usize.into()];
                    row.extend((0..7).map(|_| Cell::Float(f64::NAN)));
                    row.extend([leading.s0.into(), f64::NAN.into()]);
                    table.push(row);
                }
            }
        }
        let summary = json!({
            "smallest_strong_q0": smallest,
            "leading_ratio_converges": converges_in_trend(&ratios, self.tolerances.get("trend_slack")),
            "failures": failures,
        });
        (table, summary)
    }
}

fn state_json(s: &BackgroundState) -> Value {
    json!({
        "s0": num(s.s0), "alpha": num(s.alpha), "rho_plus": num(s.rho_plus),
        "u1_plus": num(s.u1_plus), "u3_plus": num(s.u3_plus), "c_plus_sq": num(s.c_plus_sq),
    })
}

fn comparison_json(s: &BackgroundState, lead: &LeadingOrder) -> Value {
    json!({
        "s0_leading": num(lead.s0),
        "s0_ratio": num(s.s0 / lead.s0),
        "rho_plus_leading": num(lead.rho_plus),
        "rho_plus_ratio": num(s.rho_plus / lead.rho_plus),
        "alpha_leading": num(lead.alpha),
        "c_plus_sq_leading": num(lead.c_plus_sq),
        "speed_gap_leading": num(lead.speed_gap),
        "speed_gap": num(s.speed_sq() - s.c_plus_sq),
    })
}

/// Admissibility of a returned state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checks {
    pub residual: bool,
    pub entropy: bool,
    pub subsonic: bool,
    pub slope_above_wedge: bool,
}

impl Checks {
    pub fn evaluate(gas: &GasParams, geom: &WedgeGeometry, s: &BackgroundState, residual_tol: f64) -> Self {
        Self {
            residual: s.residual <= residual_tol,
            entropy: s.rho_plus > gas.rho0(),
            subsonic: s.speed_sq() < s.c_plus_sq,
            slope_above_wedge: s.s0 > geom.b0,
        }
    }

    pub fn all(&self) -> bool {
        self.residual && self.entropy && self.subsonic && self.slope_above_wedge
    }

    fn to_json(self) -> Value {
        json!({
            "residual": self.residual, "entropy": self.entropy,
            "subsonic": self.subsonic, "slope_above_wedge": self.slope_above_wedge,
        })
    }
}
