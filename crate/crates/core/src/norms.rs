//! Sampled estimates of the edge/infinity weighted Hölder norms and of the
//! scale-invariant norm |u|_a^(b) near the edge.
//!
//! Every quantity here is a maximum over a finite plan, so it bounds the true
//! supremum from below.

use alloc::vec::Vec;

use crate::math;
use crate::par;
use crate::spectral::{assemble, FieldSample, SeriesSolution};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NormError {
    #[error("derivative order {0} exceeds the supported maximum of 2")]
    OrderTooHigh(u8),
    #[error("Hölder exponent must lie in (0, 1), got {0}")]
    InvalidHolder(f64),
    #[error("exponents outside the admissible range: {0}")]
    HypothesisRange(&'static str),
    #[error("invalid sample plan: {0}")]
    InvalidPlan(&'static str),
}

/// Which weights apply: both regions, only r < 1, only r > 1, or the
/// scale-invariant |u|_a^(b) on r < 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormVariant {
    Full { k: f64, l: f64 },
    Edge { k: f64 },
    Far { l: f64 },
    ScaleInvariant { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    order: u8,
    alpha: f64,
    variant: NormVariant,
}

impl NormSpec {
    pub fn new(order: u8, alpha: f64, variant: NormVariant) -> Result<Self, NormError> {
        if order > 2 {
            return Err(NormError::OrderTooHigh(order));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(NormError::InvalidHolder(alpha));
        }
        if let NormVariant::ScaleInvariant { a, .. } = variant {
            if !(0.0..1.0).contains(&a) {
                return Err(NormError::HypothesisRange("scale-invariant norm needs 0 ≤ a < 1"));
            }
        }
        Ok(Self { order, alpha, variant })
    }

    pub fn full(order: u8, alpha: f64, k: f64, l: f64) -> Result<Self, NormError> {
        Self::new(order, alpha, NormVariant::Full { k, l })
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn variant(&self) -> NormVariant {
        self.variant
    }

    fn edge_exponent(&self) -> Option<f64> {
        match self.variant {
            NormVariant::Full { k, .. } | NormVariant::Edge { k } => Some(k),
            _ => None,
        }
    }

    fn far_exponent(&self) -> Option<f64> {
        match self.variant {
            NormVariant::Full { l, .. } | NormVariant::Far { l } => Some(l),
            _ => None,
        }
    }
}

/// Value, Cartesian gradient and Hessian at a point x = (x₁, x₂, x₃).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CartesianJet {
    pub value: f64,
    pub gradient: [f64; 3],
    pub hessian: [[f64; 3]; 3],
}

impl CartesianJet {
    /// Σ_{|β| = m} |D^β u| for m ≤ 2, summing over multi-indices.
    pub fn derivative_sum(&self, m: u8) -> f64 {
        match m {
            0 => math::abs(self.value),
            1 => self.gradient.iter().map(|g| math::abs(*g)).sum(),
            _ => {
                let h = &self.hessian;
                [h[0][0], h[0][1], h[0][2], h[1][1], h[1][2], h[2][2]].iter().map(|v| math::abs(*v)).sum()
            }
        }
    }

    /// The derivatives of order m as a flat list, in multi-index order.
    pub fn derivatives(&self, m: u8) -> Vec<f64> {
        match m {
            0 => alloc::vec![self.value],
            1 => self.gradient.to_vec(),
            _ => {
                let h = &self.hessian;
                alloc::vec![h[0][0], h[0][1], h[0][2], h[1][1], h[1][2], h[2][2]]
            }
        }
    }
}

/// √(x₁² + x₃²), the distance to the edge.
pub fn edge_distance(x: [f64; 3]) -> f64 {
    math::hypot(x[0], x[2])
}

/// Map (r, θ, y₂) to (r cos θ, y₂, r sin θ).
pub fn to_cartesian(r: f64, theta: f64, y2: f64) -> [f64; 3] {
    [r * math::cos(theta), y2, r * math::sin(theta)]
}

/// Convert derivatives in (r, θ, y₂) to Cartesian ones at radius r, angle θ.
pub fn cartesian_jet(sample: &FieldSample, r: f64, theta: f64) -> CartesianJet {
    let (c, s) = (math::cos(theta), math::sin(theta));
    // Rows: ∂q_k/∂x_i for q = (r, θ, y₂), x = (x₁, x₂, x₃).
    let dq = [[c, 0.0, s], [-s / r, 0.0, c / r], [0.0, 1.0, 0.0]];
    let r2 = r * r;
    let d2r = [[s * s / r, 0.0, -c * s / r], [0.0, 0.0, 0.0], [-c * s / r, 0.0, c * c / r]];
    let d2t = [[2.0 * c * s / r2, 0.0, (s * s - c * c) / r2], [0.0, 0.0, 0.0], [(s * s - c * c) / r2, 0.0, -2.0 * c * s / r2]];
    let g = sample.gradient;
    let h = sample.hessian;
    let mut out = CartesianJet { value: sample.value, ..CartesianJet::default() };
    for i in 0..3 {
        out.gradient[i] = (0..3).map(|k| g[k] * dq[k][i]).sum();
        for j in 0..3 {
            let mut acc = g[0] * d2r[i][j] + g[1] * d2t[i][j];
            for k in 0..3 {
                for l in 0..3 {
                    acc += h[k][l] * dq[k][i] * dq[l][j];
                }
            }
            out.hessian[i][j] = acc;
        }
    }
    out
}

/// A scalar field that can be sampled with derivatives up to order 2.
pub trait Field: Sync {
    fn value(&self, x: [f64; 3]) -> f64;

    /// Centered differences with step 10⁻⁴·max(r_x, 1) unless overridden.
    fn jet(&self, x: [f64; 3], order: u8) -> CartesianJet {
        finite_difference_jet(&|p| self.value(p), x, order)
    }
}

impl<F: Fn([f64; 3]) -> f64 + Sync> Field for F {
    fn value(&self, x: [f64; 3]) -> f64 {
        self(x)
    }
}

pub fn finite_difference_jet(f: &dyn Fn([f64; 3]) -> f64, x: [f64; 3], order: u8) -> CartesianJet {
    let h = 1e-4 * edge_distance(x).max(1.0);
    let shifted = |i: usize, a: f64, j: usize, b: f64| {
        let mut p = x;
        p[i] += a;
        p[j] += b;
        f(p)
    };
    let centre = f(x);
    let mut out = CartesianJet { value: centre, ..CartesianJet::default() };
    if order >= 1 {
        for i in 0..3 {
            out.gradient[i] = (shifted(i, h, i, 0.0) - shifted(i, -h, i, 0.0)) / (2.0 * h);
        }
    }
    if order >= 2 {
        for i in 0..3 {
            out.hessian[i][i] = (shifted(i, h, i, 0.0) - 2.0 * centre + shifted(i, -h, i, 0.0)) / (h * h);
            for j in (i + 1)..3 {
                let mixed = (shifted(i, h, j, h) - shifted(i, h, j, -h) - shifted(i, -h, j, h) + shifted(i, -h, j, -h))
                    / (4.0 * h * h);
                out.hessian[i][j] = mixed;
                out.hessian[j][i] = mixed;
            }
        }
    }
    out
}

/// Analytic derivatives of a series solution, in Cartesian form.
pub struct SeriesField<'a>(pub &'a SeriesSolution);

impl Field for SeriesField<'_> {
    fn value(&self, x: [f64; 3]) -> f64 {
        self.jet(x, 0).value
    }

    fn jet(&self, x: [f64; 3], order: u8) -> CartesianJet {
        let r = edge_distance(x);
        let theta = math::atan2(x[2], x[0]);
        match assemble(self.0, r, theta, x[1], order) {
            Ok(sample) => cartesian_jet(&sample, r, theta),
            Err(_) => CartesianJet { value: f64::NAN, gradient: [f64::NAN; 3], hessian: [[f64::NAN; 3]; 3] },
        }
    }
}

/// Where the sample plan lives: θ ∈ [θ₀, π/2], r ∈ [r_min, r_max], x₂ ∈ [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanSpec {
    pub theta0: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    pub pairs: usize,
    pub seed: u64,
}

impl PlanSpec {
    pub fn wedge(theta0: f64, r_max: f64) -> Self {
        Self { theta0, r_min: 1e-6, r_max, points: 2000, pairs: 10_000, seed: 0 }
    }
}

/// Deterministic points and point pairs. No pair straddles r = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    pub points: Vec<[f64; 3]>,
    pub pairs: Vec<([f64; 3], [f64; 3])>,
}

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let (mut result, mut scale) = (0.0, 1.0 / base as f64);
    while index > 0 {
        result += (index % base) as f64 * scale;
        index /= base;
        scale /= base as f64;
    }
    result
}

impl SamplePlan {
    /// Halton points, geometric in r so that every dyadic shell is covered.
    /// Pair partners sit at relative distances 10⁻¹, 10⁻², 10⁻³ and on the same
    /// side of r = 1 as their anchor.
    pub fn new(spec: &PlanSpec) -> Result<Self, NormError> {
        if !(spec.theta0 >= 0.0 && spec.theta0 < math::FRAC_PI_2) {
            return Err(NormError::InvalidPlan("θ₀ must lie in [0, π/2)"));
        }
        if !(spec.r_min > 0.0 && spec.r_max > spec.r_min) {
            return Err(NormError::InvalidPlan("need 0 < r_min < r_max"));
        }
        if spec.points == 0 {
            return Err(NormError::InvalidPlan("need at least one point"));
        }
        let width = math::FRAC_PI_2 - spec.theta0;
        let (lo, hi) = (math::ln(spec.r_min), math::ln(spec.r_max));
        let offset = 1 + spec.seed.wrapping_mul(7919);
        let cylinder = |i: u64| {
            let idx = offset + i;
            let r = math::exp(lo + (hi - lo) * radical_inverse(idx, 2));
            let theta = spec.theta0 + width * radical_inverse(idx, 3);
            let y = math::TAU * radical_inverse(idx, 5);
            (r, theta, y)
        };
        let points = (0..spec.points as u64)
            .map(|i| {
                let (r, t, y) = cylinder(i);
                to_cartesian(r, t, y)
            })
            .collect();
        let pairs = (0..spec.pairs as u64)
            .map(|i| {
                let (r, t, y) = cylinder(i % spec.points as u64);
                let idx = offset + i;
                let rho = [1e-1, 1e-2, 1e-3][(i % 3) as usize];
                let (u, v, w) = (radical_inverse(idx, 7) - 0.5, radical_inverse(idx, 11) - 0.5, radical_inverse(idx, 13) - 0.5);
                let mut r2 = (r * (1.0 + rho * u)).clamp(spec.r_min, spec.r_max);
                if (r < 1.0) != (r2 < 1.0) {
                    r2 = r;
                }
                let t2 = (t + rho * v).clamp(spec.theta0, math::FRAC_PI_2);
                let y2 = y + rho * w * r.max(1.0);
                (to_cartesian(r, t, y), to_cartesian(r2, t2, y2))
            })
            .collect();
        Ok(Self { points, pairs })
    }

    /// Keep only points (and pairs) with r_x inside [lo, hi].
    pub fn restricted(&self, lo: f64, hi: f64) -> Self {
        let inside = |x: &[f64; 3]| {
            let r = edge_distance(*x);
            r >= lo && r <= hi
        };
        Self {
            points: self.points.iter().copied().filter(inside).collect(),
            pairs: self.pairs.iter().copied().filter(|(a, b)| inside(a) && inside(b)).collect(),
        }
    }
}

/// A sampled norm: one sup term per derivative order, the top-order Hölder
/// quotient term, and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub sup_terms: Vec<f64>,
    pub holder_term: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Split {
    edge: f64,
    far: f64,
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    math::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
}

fn max_reduce(values: impl Iterator<Item = Split>) -> Split {
    values.fold(Split::default(), |acc, s| Split { edge: acc.edge.max(s.edge), far: acc.far.max(s.far) })
}

/// Sup of r^{max(k+j,0)}·Σ|D^β u| near the edge and r^{l+j}·Σ|D^β u| far away.
fn sup_term(jets: &[([f64; 3], CartesianJet)], spec: &NormSpec, j: u8) -> Split {
    let jf = f64::from(j);
    max_reduce(jets.iter().map(|(x, jet)| {
        let r = edge_distance(*x);
        let size = jet.derivative_sum(j);
        let mut s = Split::default();
        if r < 1.0 {
            if let Some(k) = spec.edge_exponent() {
                s.edge = math::pow(r, (k + jf).max(0.0)) * size;
            }
        } else if r > 1.0 {
            if let Some(l) = spec.far_exponent() {
                s.far = math::pow(r, l + jf) * size;
            }
        }
        s
    }))
}

fn holder_term(field: &dyn Field, plan: &SamplePlan, spec: &NormSpec) -> Split {
    let m = spec.order;
    let mf = f64::from(m);
    let alpha = spec.alpha;
    let rows = par::map_slice(&plan.pairs, |&(x, y)| {
        let d = distance(x, y);
        if d == 0.0 {
            return Split::default();
        }
        let (dx, dy) = (field.jet(x, m).derivatives(m), field.jet(y, m).derivatives(m));
        let quotient: f64 = dx.iter().zip(&dy).map(|(a, b)| math::abs(a - b)).sum::<f64>() / math::pow(d, alpha);
        let r = edge_distance(x).min(edge_distance(y));
        let mut s = Split::default();
        if r < 1.0 {
            if let Some(k) = spec.edge_exponent() {
                s.edge = math::pow(r, (k + mf + alpha).max(0.0)) * quotient;
            }
        } else if r > 1.0 {
            if let Some(l) = spec.far_exponent() {
                s.far = math::pow(r, l + mf + alpha) * quotient;
            }
        }
        s
    });
    max_reduce(rows.into_iter())
}

/// Lower-bound estimate of the norm named by `spec` on the plan.
pub fn weighted_norm(field: &dyn Field, spec: &NormSpec, plan: &SamplePlan) -> NormEstimate {
    if let NormVariant::ScaleInvariant { a, b } = spec.variant {
        let total = scale_invariant_norm(field, a, b, plan);
        return NormEstimate { sup_terms: alloc::vec![total], holder_term: 0.0, total };
    }
    let jets: Vec<([f64; 3], CartesianJet)> = par::map_slice(&plan.points, |&x| (x, field.jet(x, spec.order)));
    let sup_terms: Vec<f64> = (0..=spec.order)
        .map(|j| {
            let s = sup_term(&jets, spec, j);
            s.edge.max(s.far)
        })
        .collect();
    let h = holder_term(field, plan, spec);
    let holder_term = h.edge.max(h.far);
    let total = sup_terms.iter().sum::<f64>() + holder_term;
    NormEstimate { sup_terms, holder_term, total }
}

/// sup_σ σ^{a+b}·‖u‖_{C^a(E_σ)} over the plan restricted to r < 1, with
/// E_σ = {σ < r_x < 1}. For a = 0 the Hölder part is dropped.
pub fn scale_invariant_norm(field: &dyn Field, a: f64, b: f64, plan: &SamplePlan) -> f64 {
    let parts = scale_invariant_parts(field, a, plan);
    parts.iter().map(|p| math::pow(p.sigma, a + b) * (p.sup + p.holder)).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy)]
struct SigmaLevel {
    sigma: f64,
    /// sup over points with r_x ≥ σ.
    sup: f64,
    /// sup over pairs with r_{x,y} ≥ σ.
    holder: f64,
}

fn scale_invariant_parts(field: &dyn Field, a: f64, plan: &SamplePlan) -> Vec<SigmaLevel> {
    let inner = plan.restricted(0.0, 1.0 - f64::EPSILON);
    let mut events: Vec<(f64, f64, f64)> = par::map_slice(&inner.points, |&x| (edge_distance(x), math::abs(field.value(x)), 0.0));
    if a > 0.0 {
        events.extend(par::map_slice(&inner.pairs, |&(x, y)| {
            let d = distance(x, y);
            let q = if d > 0.0 { math::abs(field.value(x) - field.value(y)) / math::pow(d, a) } else { 0.0 };
            (edge_distance(x).min(edge_distance(y)), 0.0, q)
        }));
    }
    // Sweep σ downward through the sampled radii, keeping suffix maxima.
    events.sort_by(|p, q| q.0.total_cmp(&p.0));
    let mut levels = Vec::with_capacity(events.len());
    let (mut sup, mut holder) = (0.0f64, 0.0f64);
    for (sigma, s, h) in events {
        sup = sup.max(s);
        holder = holder.max(h);
        levels.push(SigmaLevel { sigma, sup, holder });
    }
    levels
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    /// |u|_{a;E}^(b).
    pub norm_a: f64,
    /// |u|_{a′;E}^(b).
    pub norm_a_prime: f64,
    /// Empirical C in |u|_{a′}^(b) ≤ C|u|_a^(b).
    pub constant_ii: f64,
    /// ‖u‖_{0,a;E}^(b,★).
    pub edge_norm: f64,
    /// Empirical C in |u|_a^(b) ≤ C‖u‖_{0,a;E}^(b,★).
    pub constant_iii: f64,
    /// sup_σ σ^{a+b} sup_{E_σ}|u| against sup r^b|u|.
    pub chain_sup: (f64, f64),
    /// sup_σ σ^{a+b}·(Hölder quotient on E_σ) against sup r_{x,y}^{a+b}·quotient.
    pub chain_holder: (f64, f64),
    /// Both chains hold with C = 1 up to rounding.
    pub chains_hold: bool,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Sampled versions of the comparison between the scale-invariant norms and
/// the edge-weighted norm: needs 0 < a < 1, 0 < b < 1, 0 ≤ a′ ≤ a.
pub fn scaling_checks(field: &dyn Field, a: f64, b: f64, a_prime: f64, plan: &SamplePlan) -> Result<ScalingReport, NormError> {
    if !(a > 0.0 && a < 1.0) {
        return Err(NormError::HypothesisRange("need 0 < a < 1"));
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(NormError::HypothesisRange("need 0 < b < 1"));
    }
    if !(a_prime >= 0.0 && a_prime <= a) {
        return Err(NormError::HypothesisRange("need 0 ≤ a′ ≤ a"));
    }
    let inner = plan.restricted(0.0, 1.0 - f64::EPSILON);
    let norm_a = scale_invariant_norm(field, a, b, &inner);
    let norm_a_prime = scale_invariant_norm(field, a_prime, b, &inner);
    let edge_spec = NormSpec::new(0, a, NormVariant::Edge { k: b })?;
    let edge = weighted_norm(field, &edge_spec, &inner);
    let levels = scale_invariant_parts(field, a, &inner);
    let chain_sup_lhs = levels.iter().map(|p| math::pow(p.sigma, a + b) * p.sup).fold(0.0, f64::max);
    let chain_holder_lhs = levels.iter().map(|p| math::pow(p.sigma, a + b) * p.holder).fold(0.0, f64::max);
    let chain_sup_rhs = edge.sup_terms[0];
    let chain_holder_rhs = edge.holder_term;
    let slack = |rhs: f64| rhs * (1.0 + 1e-12);
    Ok(ScalingReport {
        norm_a,
        norm_a_prime,
        constant_ii: ratio(norm_a_prime, norm_a),
        edge_norm: edge.total,
        constant_iii: ratio(norm_a, edge.total),
        chain_sup: (chain_sup_lhs, chain_sup_rhs),
        chain_holder: (chain_holder_lhs, chain_holder_rhs),
        chains_hold: chain_sup_lhs <= slack(chain_sup_rhs) && chain_holder_lhs <= slack(chain_holder_rhs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radial(f: fn(f64) -> f64) -> impl Fn([f64; 3]) -> f64 + Sync {
        move |x| f(edge_distance(x))
    }

    #[test]
    fn constant_on_annulus() {
        let plan = SamplePlan::new(&PlanSpec { theta0: 0.3, r_min: 1.0 + 1e-12, r_max: 2.0, points: 500, pairs: 500, seed: 1 }).unwrap();
        let spec = NormSpec::full(0, 0.5, 0.0, 1.0).unwrap();
        let est = weighted_norm(&|_: [f64; 3]| 1.0, &spec, &plan);
        assert_eq!(est.holder_term, 0.0);
        assert!(est.total <= 2.0 && est.total > 1.99, "{est:?}");
    }

    #[test]
    fn weight_clamps_at_zero_near_the_edge() {
        let plan = SamplePlan::new(&PlanSpec { theta0: 0.3, r_min: 1e-6, r_max: 1.0, points: 800, pairs: 0, seed: 2 }).unwrap();
        let delta = 0.4;
        let spec = NormSpec::new(0, 0.5, NormVariant::Edge { k: -delta }).unwrap();
        let est = weighted_norm(&radial(|r| r.powf(0.4)), &spec, &plan);
        assert!(est.sup_terms[0] <= 1.0 && est.sup_terms[0] > 0.99);
    }

    #[test]
    fn inverse_root_with_positive_weight() {
        let plan = SamplePlan::new(&PlanSpec { theta0: 0.3, r_min: 1e-6, r_max: 1.0, points: 2000, pairs: 0, seed: 3 }).unwrap();
        let spec = NormSpec::new(0, 0.5, NormVariant::Edge { k: 0.7 }).unwrap();
        let est = weighted_norm(&radial(|r| r.powf(-0.5)), &spec, &plan);
        // r^{0.7}·r^{−0.5} = r^{0.2}, whose sup on (0, 1) is 1.
        assert!(est.sup_terms[0] <= 1.0 && est.sup_terms[0] > 0.99, "{est:?}");
    }

    #[test]
    fn cylindrical_conversion_matches_differences() {
        // u = r² cos 2θ · sin y = (x₁² − x₃²) sin x₂
        let sample = |r: f64, t: f64, y: f64| FieldSample {
            value: r * r * (2.0 * t).cos() * y.sin(),
            gradient: [2.0 * r * (2.0 * t).cos() * y.sin(), -2.0 * r * r * (2.0 * t).sin() * y.sin(), r * r * (2.0 * t).cos() * y.cos()],
            hessian: [
                [2.0 * (2.0 * t).cos() * y.sin(), -4.0 * r * (2.0 * t).sin() * y.sin(), 2.0 * r * (2.0 * t).cos() * y.cos()],
                [-4.0 * r * (2.0 * t).sin() * y.sin(), -4.0 * r * r * (2.0 * t).cos() * y.sin(), -2.0 * r * r * (2.0 * t).sin() * y.cos()],
                [2.0 * r * (2.0 * t).cos() * y.cos(), -2.0 * r * r * (2.0 * t).sin() * y.cos(), -r * r * (2.0 * t).cos() * y.sin()],
            ],
        };
        let (r, t, y) = (1.3, 0.7, 0.4);
        let jet = cartesian_jet(&sample(r, t, y), r, t);
        let x = to_cartesian(r, t, y);
        let exact = CartesianJet {
            value: (x[0] * x[0] - x[2] * x[2]) * x[1].sin(),
            gradient: [2.0 * x[0] * x[1].sin(), (x[0] * x[0] - x[2] * x[2]) * x[1].cos(), -2.0 * x[2] * x[1].sin()],
            hessian: [
                [2.0 * x[1].sin(), 2.0 * x[0] * x[1].cos(), 0.0],
                [2.0 * x[0] * x[1].cos(), -(x[0] * x[0] - x[2] * x[2]) * x[1].sin(), -2.0 * x[2] * x[1].cos()],
                [0.0, -2.0 * x[2] * x[1].cos(), -2.0 * x[1].sin()],
            ],
        };
        assert!((jet.value - exact.value).abs() < 1e-14);
        for i in 0..3 {
            assert!((jet.gradient[i] - exact.gradient[i]).abs() < 1e-13);
            for j in 0..3 {
                assert!((jet.hessian[i][j] - exact.hessian[i][j]).abs() < 1e-12, "({i},{j})");
            }
        }
        let fd = finite_difference_jet(&|p: [f64; 3]| (p[0] * p[0] - p[2] * p[2]) * p[1].sin(), x, 2);
        for i in 0..3 {
            for j in 0..3 {
                assert!((fd.hessian[i][j] - exact.hessian[i][j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(NormSpec::full(3, 0.5, 0.0, 0.0).is_err());
        assert!(NormSpec::full(1, 1.0, 0.0, 0.0).is_err());
        assert!(NormSpec::new(0, 0.5, NormVariant::ScaleInvariant { a: 1.2, b: 0.3 }).is_err());
        let plan = SamplePlan::new(&PlanSpec::wedge(0.3, 1.0)).unwrap();
        assert!(scaling_checks(&|_: [f64; 3]| 0.0, 0.5, 1.5, 0.2, &plan).is_err());
        assert!(scaling_checks(&|_: [f64; 3]| 0.0, 0.5, 0.5, 0.7, &plan).is_err());
    }
}
