//! Projection of a source onto the angular/periodic eigenbasis.

use alloc::vec;
use alloc::vec::Vec;

use super::{ModeKey, Parity, RadialGrid, SpectralError, Truncation, WedgeDomain};
use crate::math;
use crate::par;
use crate::quad::GaussRule;

/// Source term f(r, θ, y₂).
pub trait Source: Sync {
    fn value(&self, r: f64, theta: f64, y2: f64) -> f64;
}

impl<F: Fn(f64, f64, f64) -> f64 + Sync> Source for F {
    fn value(&self, r: f64, theta: f64, y2: f64) -> f64 {
        self(r, theta, y2)
    }
}

/// Tensor rule in (θ, y₂): Gauss–Legendre on [θ₀, π/2] and the trapezoid
/// rule on [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct AngularRule {
    pub thetas: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub ys: Vec<f64>,
    /// cos(√μ_m(θ_a − θ₀)) indexed [m][a].
    angular: Vec<Vec<f64>>,
    /// (cos(n y_b), sin(n y_b)) indexed [n][b].
    periodic: Vec<(Vec<f64>, Vec<f64>)>,
}

impl AngularRule {
    pub fn new(domain: &WedgeDomain, trunc: &Truncation) -> Self {
        Self::with_counts(domain, trunc, 6 * trunc.m_max + 24, 4 * trunc.n_max + 8)
    }

    pub fn with_counts(domain: &WedgeDomain, trunc: &Truncation, theta_count: usize, y_count: usize) -> Self {
        let rule = GaussRule::legendre(theta_count.max(4 * trunc.m_max));
        let (thetas, theta_weights): (Vec<f64>, Vec<f64>) = rule.on_interval(domain.theta0(), math::FRAC_PI_2).unzip();
        let y_count = y_count.max(4 * trunc.n_max).max(2 * trunc.n_max + 1);
        let ys: Vec<f64> = (0..y_count).map(|b| math::TAU * b as f64 / y_count as f64).collect();
        let angular = (0..=trunc.m_max)
            .map(|m| {
                let p = domain.angular_order(m);
                thetas.iter().map(|t| math::cos(p * (t - domain.theta0()))).collect()
            })
            .collect();
        let periodic = (0..=trunc.n_max)
            .map(|n| {
                let n = n as f64;
                (ys.iter().map(|y| math::cos(n * y)).collect(), ys.iter().map(|y| math::sin(n * y)).collect())
            })
            .collect();
        Self { thetas, theta_weights, ys, angular, periodic }
    }

    pub fn slab_len(&self) -> usize {
        self.thetas.len() * self.ys.len()
    }
}

/// Radial profiles of every retained mode on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTable {
    pub domain: WedgeDomain,
    pub truncation: Truncation,
    pub grid: RadialGrid,
    /// profiles[key_index][node]
    profiles: Vec<Vec<f64>>,
    /// Compatibility constant from the same tensor quadrature.
    pub c_l: f64,
    /// Sup of |f| over the sampled tensor grid.
    pub sup_norm: f64,
    /// Fraction of the source's L² energy not captured by the retained modes.
    pub energy_loss: f64,
}

/// Threshold on `energy_loss` above which projection warns of aliasing.
pub const ALIASING_THRESHOLD: f64 = 0.01;

impl ModeTable {
    pub fn key_index(trunc: &Truncation, key: ModeKey) -> Option<usize> {
        if key.m > trunc.m_max || key.n > trunc.n_max || (key.n == 0 && key.parity == Parity::Sin) {
            return None;
        }
        let within = if key.n == 0 { 0 } else { 2 * key.n - 1 + usize::from(key.parity == Parity::Cos) };
        Some(key.m * (2 * trunc.n_max + 1) + within)
    }

    pub fn profile(&self, key: ModeKey) -> Option<&[f64]> {
        Self::key_index(&self.truncation, key).map(|i| self.profiles[i].as_slice())
    }

    pub fn profiles(&self) -> &[Vec<f64>] {
        &self.profiles
    }

    pub fn aliasing_warning(&self) -> bool {
        self.energy_loss > ALIASING_THRESHOLD
    }

    /// Evaluate the truncated expansion Σ f_key(r)·Φ_key(θ, y₂) at a node.
    pub fn reconstruct(&self, node: usize, theta: f64, y2: f64) -> f64 {
        let keys = self.truncation.keys();
        let mut total = 0.0;
        for (key, profile) in keys.iter().zip(&self.profiles) {
            total += profile[node] * basis_value(&self.domain, *key, theta, y2);
        }
        total
    }
}

pub(crate) fn basis_value(domain: &WedgeDomain, key: ModeKey, theta: f64, y2: f64) -> f64 {
    let angular = math::cos(domain.angular_order(key.m) * (theta - domain.theta0()));
    let periodic = match key.parity {
        Parity::Sin => math::sin(key.n as f64 * y2),
        Parity::Cos => math::cos(key.n as f64 * y2),
    };
    angular * periodic
}

pub(crate) struct NodeProjection {
    pub(crate) coeffs: Vec<f64>,
    pub(crate) mean: f64,
    pub(crate) energy: f64,
    pub(crate) captured: f64,
    pub(crate) sup: f64,
}

pub(crate) fn project_slab(domain: &WedgeDomain, trunc: &Truncation, rule: &AngularRule, slab: &[f64]) -> NodeProjection {
    let ny = rule.ys.len();
    let width = domain.aperture();
    let n_max = trunc.n_max;
    // Fourier coefficients in y₂ for each θ node: [a][0] = mean, [a][2n−1] = sin, [a][2n] = cos.
    let mut fourier = vec![0.0; rule.thetas.len() * (2 * n_max + 1)];
    let mut energy = 0.0;
    let mut sup: f64 = 0.0;
    for (a, row) in slab.chunks_exact(ny).enumerate() {
        let out = &mut fourier[a * (2 * n_max + 1)..(a + 1) * (2 * n_max + 1)];
        let mut sq = 0.0;
        for &v in row {
            out[0] += v;
            sq += v * v;
            sup = sup.max(math::abs(v));
        }
        out[0] /= ny as f64;
        energy += rule.theta_weights[a] * sq * math::TAU / ny as f64;
        for n in 1..=n_max {
            let (cosines, sines) = &rule.periodic[n];
            let (mut s, mut c) = (0.0, 0.0);
            for b in 0..ny {
                s += row[b] * sines[b];
                c += row[b] * cosines[b];
            }
            out[2 * n - 1] = 2.0 * s / ny as f64;
            out[2 * n] = 2.0 * c / ny as f64;
        }
    }
    let mut coeffs = Vec::with_capacity((trunc.m_max + 1) * (2 * n_max + 1));
    let mut captured = 0.0;
    let mut mean = 0.0;
    for m in 0..=trunc.m_max {
        let eps = if m == 0 { 1.0 } else { 2.0 };
        let angular = &rule.angular[m];
        for j in 0..=2 * n_max {
            let mut acc = 0.0;
            for (a, (&w, &c)) in rule.theta_weights.iter().zip(angular).enumerate() {
                acc += w * c * fourier[a * (2 * n_max + 1) + j];
            }
            let coeff = eps * acc / width;
            if m == 0 && j == 0 {
                mean = acc / width;
            }
            let norm = (width / eps) * if j == 0 { math::TAU } else { math::PI };
            captured += coeff * coeff * norm;
            coeffs.push(coeff);
        }
    }
    NodeProjection { coeffs, mean, energy, captured, sup }
}

/// Project samples laid out as [node][θ index][y₂ index].
pub fn project_samples(
    domain: &WedgeDomain,
    trunc: &Truncation,
    grid: &RadialGrid,
    rule: &AngularRule,
    samples: &[f64],
) -> Result<ModeTable, SpectralError> {
    let slab = rule.slab_len();
    assert_eq!(samples.len(), slab * grid.nodes().len(), "sample layout does not match grid");
    if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
        let (k, rest) = (pos / slab, pos % slab);
        let (a, b) = (rest / rule.ys.len(), rest % rule.ys.len());
        return Err(SpectralError::NonFiniteSource { r: grid.nodes()[k], theta: rule.thetas[a], y2: rule.ys[b] });
    }
    let per_node = par::map_indexed(grid.nodes().len(), |k| {
        project_slab(domain, trunc, rule, &samples[k * slab..(k + 1) * slab])
    });
    Ok(collect(domain, trunc, grid, per_node))
}

/// Sample `source` on the tensor grid and project.
pub fn project_modes(
    source: &dyn Source,
    domain: &WedgeDomain,
    trunc: &Truncation,
    grid: &RadialGrid,
    rule: &AngularRule,
) -> Result<ModeTable, SpectralError> {
    let samples = sample_source(source, grid, rule);
    project_samples(domain, trunc, grid, rule, &samples)
}

pub(crate) fn sample_source(source: &dyn Source, grid: &RadialGrid, rule: &AngularRule) -> Vec<f64> {
    let slabs = par::map_slice(grid.nodes(), |&r| {
        let mut slab = Vec::with_capacity(rule.slab_len());
        for &t in &rule.thetas {
            for &y in &rule.ys {
                slab.push(source.value(r, t, y));
            }
        }
        slab
    });
    slabs.concat()
}

/// Assemble per-node projections (in node order) into a mode table.
pub(crate) fn collect(domain: &WedgeDomain, trunc: &Truncation, grid: &RadialGrid, per_node: Vec<NodeProjection>) -> ModeTable {
    let count = (trunc.m_max + 1) * (2 * trunc.n_max + 1);
    let mut profiles = vec![Vec::with_capacity(per_node.len()); count];
    let (mut volume, mut energy, mut captured, mut sup) = (0.0, 0.0, 0.0, 0.0f64);
    for ((node, &r), &w) in per_node.iter().zip(grid.nodes()).zip(grid.weights()) {
        for (p, &c) in profiles.iter_mut().zip(&node.coeffs) {
            p.push(c);
        }
        volume += w * r * node.mean;
        energy += w * r * node.energy;
        captured += w * r * node.captured;
        sup = sup.max(node.sup);
    }
    let energy_loss = if energy > 0.0 { ((energy - captured) / energy).max(0.0) } else { 0.0 };
    ModeTable {
        domain: *domain,
        truncation: *trunc,
        grid: grid.clone(),
        profiles,
        c_l: volume / domain.length(),
        sup_norm: sup,
        energy_loss,
    }
}

/// c_L = (1/(2πLΘ))∫_{Q_L} f dy by tensor quadrature.
pub fn compat_constant(
    source: &dyn Source,
    domain: &WedgeDomain,
    grid: &RadialGrid,
    rule: &AngularRule,
) -> Result<f64, SpectralError> {
    let ny = rule.ys.len() as f64;
    let partial = par::map_slice(grid.nodes(), |&r| {
        let mut acc = 0.0;
        for (&t, &wt) in rule.thetas.iter().zip(&rule.theta_weights) {
            let mut row = 0.0;
            for &y in &rule.ys {
                row += source.value(r, t, y);
            }
            acc += wt * row / ny;
        }
        acc
    });
    let mut total = 0.0;
    for ((acc, &r), &w) in partial.iter().zip(grid.nodes()).zip(grid.weights()) {
        if !acc.is_finite() {
            return Err(SpectralError::NonFiniteSource { r, theta: f64::NAN, y2: f64::NAN });
        }
        total += w * r * acc;
    }
    Ok(total / (domain.aperture() * domain.length()))
}
