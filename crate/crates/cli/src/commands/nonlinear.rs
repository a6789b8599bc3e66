//! `nonlinear`: defect-correction iteration for the perturbed shock problem.

use serde::Deserialize;
use serde_json::{json, Value};
use wedge_core::nonlinear::{
    far_field_study, run_iteration, shock_surface, IncomingFlow, IterationSettings, IterationState, IterationWarning,
    Perturbation, Problem, Workspace,
};
use wedge_core::shockstate::{UpstreamState, WedgeGeometry};
use wedge_core::spectral::{Truncation, WedgeDomain, WeightExponents};

use super::background::GasConfig;
use super::{failed, invalid};
use crate::config::{as_count, Named, Tolerances, TruncationPair, Weights};
use crate::output::{num, Artifact, Table};
use crate::{CliError, RunContext};

const TOLERANCES: &[(&str, f64)] = &[("update", 1e-8), ("edge", 1e-9)];

fn default_truncation() -> TruncationPair {
    TruncationPair(12, 12)
}

fn default_cut() -> f64 {
    32.0
}

fn default_steps() -> usize {
    25
}

fn default_edge_samples() -> usize {
    64
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrustConfig {
    pub points: usize,
    pub pairs: usize,
}

impl Default for TrustConfig {
    fn default() -> Self {
        Self { points: 200, pairs: 400 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceConfig {
    pub y2: usize,
    pub y3: usize,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self { y2: 16, y3: 9 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearConfig {
    pub gas: GasConfig,
    pub q0: f64,
    pub b0: f64,
    pub epsilon: f64,
    pub psi: Named,
    #[serde(default = "default_truncation")]
    pub truncation: TruncationPair,
    #[serde(rename = "L_cut", default = "default_cut")]
    pub cut_radius: f64,
    #[serde(default)]
    pub weights: Weights,
    #[serde(default = "default_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub pin_y2: f64,
    #[serde(default = "default_edge_samples")]
    pub edge_samples: usize,
    #[serde(default)]
    pub trust: TrustConfig,
    #[serde(default)]
    pub surface: SurfaceConfig,
    /// Repeat the run at twice the cut radius and report the edge change.
    #[serde(default)]
    pub far_field: bool,
}

fn parse_psi(named: &Named) -> Result<Perturbation, CliError> {
    match named.name.as_str() {
        "wave" => {
            let p = named.params(&[("support", 2.0), ("taper", 4.0), ("wavenumber", 1.0), ("phase", 0.0)])?;
            let k = as_count("wavenumber", p["wavenumber"])?;
            let wavenumber = u32::try_from(k).map_err(|_| invalid("wave: wavenumber too large"))?;
            Ok(Perturbation::Wave { support: p["support"], taper: p["taper"], wavenumber, phase: p["phase"] })
        }
        "planar" => {
            let p = named.params(&[("support", 2.0), ("taper", 4.0)])?;
            Ok(Perturbation::Planar { support: p["support"], taper: p["taper"] })
        }
        other => Err(invalid(format!("unknown perturbation {other:?}; expected wave or planar"))),
    }
}

#[derive(Debug, Clone)]
pub struct Plan {
    config: NonlinearConfig,
    gas: wedge_core::shockstate::GasParams,
    flow: IncomingFlow,
    settings: IterationSettings,
    tolerances: Tolerances,
}

impl Plan {
    pub fn from_config(ctx: &RunContext) -> Result<Self, CliError> {
        let config: NonlinearConfig = ctx.config.payload()?;
        let tolerances = ctx.config.resolve_tolerances(TOLERANCES)?;
        let gas = config.gas.build()?;
        UpstreamState::new(&gas, config.q0).map_err(invalid)?;
        let geometry = WedgeGeometry::new(config.b0).map_err(invalid)?;
        let flow = IncomingFlow::new(config.q0, config.epsilon, parse_psi(&config.psi)?).map_err(invalid)?;
        let truncation = Truncation::new(config.truncation.0, config.truncation.1).map_err(invalid)?;
        let domain = WedgeDomain::new(geometry.theta0, config.cut_radius).map_err(invalid)?;
        let w = config.weights;
        WeightExponents::new(&domain, w.delta, w.delta0, w.alpha).map_err(invalid)?;
        if config.max_steps == 0 {
            return Err(invalid("max_steps must be positive"));
        }
        if config.edge_samples < 2 || config.trust.points == 0 {
            return Err(invalid("edge_samples must be at least 2 and trust.points positive"));
        }
        if config.surface.y2 == 0 || config.surface.y3 == 0 {
            return Err(invalid("surface counts must be positive"));
        }
        if !config.pin_y2.is_finite() {
            return Err(invalid("pin_y2 must be finite"));
        }
        let settings = IterationSettings {
            truncation,
            cut_radius: config.cut_radius,
            weights: (w.delta, w.delta0, w.alpha),
            max_steps: config.max_steps,
            relative_tolerance: tolerances.get("update"),
            pin_y2: config.pin_y2,
            edge_samples: config.edge_samples,
            trust_points: config.trust.points,
            trust_pairs: config.trust.pairs,
            seed: ctx.seed,
            ..IterationSettings::default()
        };
        Ok(Self { config, gas, flow, settings, tolerances })
    }

    pub fn run(&self, ctx: &RunContext) -> Result<Vec<Artifact>, CliError> {
        let problem = Problem::new(self.gas, self.config.b0, self.flow).map_err(failed)?;
        let ws = Workspace::new(&problem, self.settings.clone()).map_err(failed)?;
        let state = run_iteration(&problem, &ws).map_err(|e| {
            CliError::numerical(e.to_string(), json!({ "u0_norm": num(ws.u0_norm), "tolerance": self.tolerances.to_json() }))
        })?;
        let surface = shock_surface(&problem, &ws, &state.iterate, self.config.surface.y2, self.config.surface.y3)
            .map_err(failed)?;
        let far = if self.config.far_field { Some(far_field_study(&problem, &ws, &state).map_err(failed)?) } else { None };

        let mut iteration = Table::new(&[
            "step", "update_norm", "contraction", "pde_res", "g1_res", "g2_res", "ellipticity_margin", "trust_norm",
        ]);
        for h in &state.history {
            iteration.push(vec![
                h.step.into(),
                h.update_norm.into(),
                h.contraction.into(),
                h.residuals.pde.into(),
                h.residuals.bc1.into(),
                h.residuals.bc2.into(),
                h.residuals.ellipticity_margin.into(),
                h.trust_norm.into(),
            ]);
        }
        let mut edge = Table::new(&["y2", "u_edge"]);
        for &(y2, u) in &state.edge_profile {
            edge.push(vec![y2.into(), u.into()]);
        }
        let mut shock = Table::new(&["y2", "y3", "x1", "x2", "x3"]);
        for &(y2, y3, x) in &surface.points {
            shock.push(vec![y2.into(), y3.into(), x[0].into(), x[1].into(), x[2].into()]);
        }

        let tol_edge = self.tolerances.get("edge");
        let max_edge = state.max_edge();
        let body = json!({
            "inputs": {
                "gamma": self.gas.gamma(), "q0": self.config.q0, "b0": self.config.b0,
                "epsilon": self.config.epsilon, "psi": self.config.psi.name,
                "truncation": [self.settings.truncation.m_max, self.settings.truncation.n_max],
                "cut_radius": self.settings.cut_radius,
            },
            "converged": true,
            "steps": state.steps(),
            "u0_norm": num(state.u0_norm),
            "stopping_tolerance": num(state.tolerance),
            "final_update": state.history.last().map(|h| num(h.update_norm)),
            "contraction_history": state.contraction_history.iter().map(|&c| num(c)).collect::<Vec<_>>(),
            "consistency_change": num(state.consistency_change),
            "residuals": {
                "pde": num(state.residuals.pde), "g1": num(state.residuals.bc1),
                "g2": num(state.residuals.bc2), "ellipticity_margin": num(state.residuals.ellipticity_margin),
            },
            "supersonic_margin": num(ws.supersonic_margin),
            "edge": {
                "max_abs": num(max_edge),
                "tol_edge": tol_edge,
                "ratio_to_tol": num(max_edge / tol_edge),
                "exceeds_1000_tol": max_edge > 1e3 * tol_edge,
            },
            "shock": {
                "fitted_slope": num(surface.fitted_slope),
                "background_slope": num(self.config.b0.recip()),
                "attachment": surface.attachment.iter().map(|&(y2, x1, x3)| json!([num(y2), num(x1), num(x3)])).collect::<Vec<_>>(),
            },
            "far_field": far.map(|f| json!({
                "base_radius": f.base_radius, "doubled_radius": f.doubled_radius,
                "max_edge": num(f.max_edge), "max_change": num(f.max_change), "relative_change": num(f.relative_change),
            })),
            "warnings": state.warnings.iter().map(warning_json).collect::<Vec<_>>(),
            "tolerances": self.tolerances.to_json(),
        });
        log_summary(&state);
        Ok(vec![
            Artifact::csv("iteration.csv", &iteration, &ctx.header)?,
            Artifact::csv("edge_profile.csv", &edge, &ctx.header)?,
            Artifact::csv("shock_surface.csv", &shock, &ctx.header)?,
            Artifact::json("nonlinear.json", body, &ctx.header),
        ])
    }
}

fn warning_json(w: &IterationWarning) -> Value {
    match *w {
        IterationWarning::LeftTrustRegion { step, norm } => {
            json!({ "kind": "left_trust_region", "step": step, "norm": num(norm) })
        }
        IterationWarning::SmallUpstreamSpeed { factor } => {
            json!({ "kind": "small_upstream_speed", "factor": num(factor) })
        }
    }
}

fn log_summary(state: &IterationState) {
    for w in &state.warnings {
        log::warn!("{w:?}");
    }
    log::info!("converged in {} steps, max edge {:e}", state.steps(), state.max_edge());
}
