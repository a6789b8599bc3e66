//! `norms`: sampled weighted Hölder norms of a named field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};
use wedge_core::norms::{
    edge_distance, scaling_checks, weighted_norm, Field, NormEstimate, NormSpec, NormVariant, PlanSpec, SamplePlan,
};

use super::invalid;
use crate::config::{as_count, Named};
use crate::output::{num, nums, Artifact};
use crate::{CliError, RunContext};

fn quarter_pi() -> f64 {
    std::f64::consts::FRAC_PI_4
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    pub pairs: usize,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self { r_min: 1e-5, r_max: 1e3, points: 2000, pairs: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    pub order: u8,
    pub alpha: f64,
    /// Edge weight exponent.
    pub k: f64,
    /// Far-field weight exponent.
    pub l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub a: f64,
    pub b: f64,
    pub a_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsConfig {
    #[serde(default = "quarter_pi")]
    pub theta0: f64,
    #[serde(default)]
    pub plan: PlanConfig,
    pub norm: NormConfig,
    pub field: Named,
    #[serde(default)]
    pub scaling: Option<ScalingConfig>,
}

/// Fields available by name.
#[derive(Debug, Clone, PartialEq)]
pub enum NamedField {
    /// r_x^b.
    Power(f64),
    /// Σ c_j cos(k_j·x + φ_j) with seeded coefficients.
    Trig(Vec<(f64, [f64; 3], f64)>),
    Zero,
}

impl NamedField {
    pub fn parse(named: &Named, seed: u64) -> Result<Self, CliError> {
        match named.name.as_str() {
            "power" => {
                let p = named.params(&[("exponent", 0.5)])?;
                if !p["exponent"].is_finite() {
                    return Err(invalid("power: exponent must be finite"));
                }
                Ok(NamedField::Power(p["exponent"]))
            }
            "trig" => {
                let p = named.params(&[("terms", 6.0)])?;
                let terms = as_count("terms", p["terms"])?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let terms = (0..terms)
                    .map(|_| {
                        // x₂ frequencies are integers so the field stays 2π-periodic.
                        let k = [rng.gen_range(-2.0..2.0), rng.gen_range(0..3) as f64, rng.gen_range(-2.0..2.0)];
                        (rng.gen_range(-1.0..1.0), k, rng.gen_range(0.0..std::f64::consts::TAU))
                    })
                    .collect();
                Ok(NamedField::Trig(terms))
            }
            "zero" => {
                named.params(&[])?;
                Ok(NamedField::Zero)
            }
            other => Err(invalid(format!("unknown field {other:?}; expected power, trig or zero"))),
        }
    }
}

impl Field for NamedField {
    fn value(&self, x: [f64; 3]) -> f64 {
        match self {
            NamedField::Power(b) => edge_distance(x).powf(*b),
            NamedField::Trig(terms) => {
                terms.iter().map(|(c, k, ph)| c * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + ph).cos()).sum()
            }
            NamedField::Zero => 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Plan {
    config: NormsConfig,
    specs: [NormSpec; 3],
    field: NamedField,
    plan: SamplePlan,
}

impl Plan {
    pub fn from_config(ctx: &RunContext) -> Result<Self, CliError> {
        let config: NormsConfig = ctx.config.payload()?;
        ctx.config.resolve_tolerances(&[])?;
        let n = config.norm;
        let specs = [
            NormSpec::full(n.order, n.alpha, n.k, n.l).map_err(invalid)?,
            NormSpec::new(n.order, n.alpha, NormVariant::Edge { k: n.k }).map_err(invalid)?,
            NormSpec::new(n.order, n.alpha, NormVariant::Far { l: n.l }).map_err(invalid)?,
        ];
        if let Some(c) = config.scaling {
            let in_unit = |v: f64| v > 0.0 && v < 1.0;
            if !(in_unit(c.a) && in_unit(c.b) && c.a_prime >= 0.0 && c.a_prime <= c.a) {
                return Err(invalid("scaling needs 0 < a < 1, 0 < b < 1 and 0 <= a_prime <= a"));
            }
        }
        let field = NamedField::parse(&config.field, ctx.seed)?;
        let p = &config.plan;
        if p.points == 0 {
            return Err(invalid("plan.points must be positive"));
        }
        let spec = PlanSpec {
            theta0: config.theta0,
            r_min: p.r_min,
            r_max: p.r_max,
            points: p.points,
            pairs: p.pairs,
            seed: ctx.seed,
        };
        let plan = SamplePlan::new(&spec).map_err(invalid)?;
        Ok(Self { config, specs, field, plan })
    }

    pub fn run(&self, ctx: &RunContext) -> Result<Vec<Artifact>, CliError> {
        let (field, plan, p) = (&self.field, &self.plan, &self.config.plan);
        let [full, edge, far] = self.specs.map(|s| weighted_norm(field, &s, plan));
        let scaling = match self.config.scaling {
            Some(c) => {
                let inner = plan.restricted(0.0, 1.0);
                let r = scaling_checks(field, c.a, c.b, c.a_prime, &inner).map_err(invalid)?;
                json!({
                    "a": c.a, "b": c.b, "a_prime": c.a_prime,
                    "norm_a": num(r.norm_a), "norm_a_prime": num(r.norm_a_prime),
                    "constant_ii": num(r.constant_ii), "edge_norm": num(r.edge_norm),
                    "constant_iii": num(r.constant_iii),
                    "chain_sup": nums(&[r.chain_sup.0, r.chain_sup.1]),
                    "chain_holder": nums(&[r.chain_holder.0, r.chain_holder.1]),
                    "chains_hold": r.chains_hold,
                })
            }
            None => Value::Null,
        };
        let n = self.config.norm;
        let body = json!({
            "inputs": {
                "theta0": self.config.theta0, "field": self.config.field.name,
                "order": n.order, "alpha": n.alpha, "k": n.k, "l": n.l,
                "plan": { "r_min": p.r_min, "r_max": p.r_max, "points": plan.points.len(), "pairs": plan.pairs.len() },
            },
            "full": estimate_json(&full),
            "edge": estimate_json(&edge),
            "far": estimate_json(&far),
            "splitting_holds": full.total >= edge.total.max(far.total) && full.total <= edge.total + far.total,
            "scaling": scaling,
        });
        Ok(vec![Artifact::json("norms.json", body, &ctx.header)])
    }
}

fn estimate_json(e: &NormEstimate) -> Value {
    json!({ "total": num(e.total), "sup_terms": nums(&e.sup_terms), "holder_term": num(e.holder_term) })
}
