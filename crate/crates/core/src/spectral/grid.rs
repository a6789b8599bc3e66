//! Composite Gauss–Legendre radial grid on [0, L].
//!
//! Panels grow geometrically away from the edge r = 0 and become uniform once
//! their width reaches a cap, so that every radial kernel (r/ξ)^p, I_p(nξ) or
//! K_p(nξ) changes by at most e^κ across one panel. That keeps the per-panel
//! polynomial interpolation of normalized integrands spectrally accurate.

use alloc::vec::Vec;

use super::SpectralError;
use crate::math;
use crate::quad::{barycentric_weights, lagrange_basis, GaussRule};

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Right end of the first panel [0, inner].
    pub inner: f64,
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    /// Allowed log-variation of a kernel across one panel.
    pub kappa: f64,
    /// Hard cap on panel width.
    pub max_width: f64,
    /// Extra breakpoints, e.g. where the source has a kink.
    pub extra_breaks: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { inner: 1e-6, order: 16, kappa: 6.0, max_width: 0.5, extra_breaks: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    breaks: Vec<f64>,
    order: usize,
    reference: GaussRule,
    reference_bary: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Interpolation and partial-integration weights for one radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub r: f64,
    pub panel: usize,
    /// ℓ_l(r) for the panel's nodes.
    pub basis: Vec<f64>,
    /// ∫_a^r ℓ_l.
    pub left: Vec<f64>,
    /// ∫_r^b ℓ_l.
    pub right: Vec<f64>,
    /// ∫_a^r ℓ_l(s) ln(r/s) ds.
    pub left_log: Vec<f64>,
}

impl RadialGrid {
    /// Build the grid for outer radius `length`, largest angular order
    /// `p_max` and largest periodic frequency `n_max`.
    pub fn new(length: f64, p_max: f64, n_max: usize, spec: &GridSpec) -> Result<Self, SpectralError> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(SpectralError::InvalidGrid("outer radius must be positive"));
        }
        if !(spec.inner > 0.0 && spec.inner < length) || spec.order < 2 || !(spec.kappa > 0.0) || !(spec.max_width > 0.0) {
            return Err(SpectralError::InvalidGrid("grid parameters out of range"));
        }
        let ratio = math::exp(spec.kappa / p_max.max(1.0)).min(2.0);
        let width_cap = spec.max_width.min(spec.kappa / (n_max.max(1) as f64));
        let mut breaks = Vec::new();
        // Geometric points below 1 (anchored at 1 so r = 1 is a breakpoint).
        let anchor = 1.0f64.min(length);
        let mut below = Vec::new();
        let mut e = anchor;
        while e > spec.inner {
            below.push(e);
            e /= ratio;
        }
        breaks.push(0.0);
        breaks.extend(below.iter().rev().copied().filter(|&b| b > spec.inner * 0.5));
        let mut e = anchor;
        while e < length {
            let width = (e * (ratio - 1.0)).min(width_cap);
            e += width;
            if e >= length - 0.25 * width {
                break;
            }
            breaks.push(e);
        }
        breaks.push(length);
        for &x in &spec.extra_breaks {
            if x > 0.0 && x < length {
                breaks.push(x);
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| math::abs(*a - *b) <= 1e-12 * b.abs().max(1e-300));
        Ok(Self::from_breaks(breaks, spec.order))
    }

    /// Grid over explicit breakpoints (first must be 0).
    pub fn from_breaks(breaks: Vec<f64>, order: usize) -> Self {
        let reference = GaussRule::legendre(order);
        let reference_bary = barycentric_weights(&reference.nodes);
        let mut nodes = Vec::with_capacity(order * (breaks.len() - 1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in breaks.windows(2) {
            for (x, wt) in reference.on_interval(w[0], w[1]) {
                nodes.push(x);
                weights.push(wt);
            }
        }
        Self { breaks, order, reference, reference_bary, nodes, weights }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn panel_count(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn length(&self) -> f64 {
        self.breaks[self.breaks.len() - 1]
    }

    pub fn panel(&self, j: usize) -> (f64, f64) {
        (self.breaks[j], self.breaks[j + 1])
    }

    pub fn panel_nodes(&self, j: usize) -> core::ops::Range<usize> {
        j * self.order..(j + 1) * self.order
    }

    /// Panel containing r, with breakpoints assigned to the panel on their left.
    pub fn locate(&self, r: f64) -> usize {
        let idx = self.breaks.partition_point(|&b| b < r);
        idx.clamp(1, self.breaks.len() - 1) - 1
    }

    fn to_reference(&self, j: usize, x: f64) -> f64 {
        let (a, b) = self.panel(j);
        (2.0 * x - a - b) / (b - a)
    }

    /// Lagrange basis of panel j at r.
    pub fn basis(&self, j: usize, r: f64) -> Vec<f64> {
        lagrange_basis(&self.reference.nodes, &self.reference_bary, self.to_reference(j, r))
    }

    /// Interpolate node values (length = node count) at r.
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        let j = self.locate(r);
        let basis = self.basis(j, r);
        basis.iter().zip(&values[self.panel_nodes(j)]).map(|(b, v)| b * v).sum()
    }

    /// Gauss rule of the grid's order mapped to [x0, x1] (x0 < x1).
    pub fn sub_rule(&self, x0: f64, x1: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.reference.on_interval(x0, x1)
    }

    pub fn probe(&self, r: f64) -> Probe {
        let panel = self.locate(r);
        let (a, _) = self.panel(panel);
        let q = self.order;
        let basis = self.basis(panel, r);
        let mut left = alloc::vec![0.0; q];
        let mut left_log = alloc::vec![0.0; q];
        if r > a {
            for (s, w) in self.reference.on_interval(a, r) {
                let l = self.basis(panel, s);
                let log_factor = math::ln(r / s);
                for k in 0..q {
                    left[k] += w * l[k];
                    left_log[k] += w * l[k] * log_factor;
                }
            }
        }
        let full = &self.weights[self.panel_nodes(panel)];
        let right = full.iter().zip(&left).map(|(f, l)| f - l).collect();
        Probe { r, panel, basis, left, right, left_log }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breakpoints_cover_domain() {
        let g = RadialGrid::new(8.0, 32.0, 8, &GridSpec::default()).unwrap();
        let b = g.breaks();
        assert_eq!(b[0], 0.0);
        assert_eq!(*b.last().unwrap(), 8.0);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        assert!(b.iter().any(|&x| x == 1.0));
        // Kernel variation per panel stays within κ.
        for w in b.windows(2).skip(1) {
            assert!(32.0 * (w[1] / w[0]).ln() <= 6.0 + 1e-9);
            assert!(8.0 * (w[1] - w[0]) <= 6.0 + 1e-9);
        }
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn grid_integrates_and_interpolates() {
        let g = RadialGrid::new(4.0, 4.0, 1, &GridSpec::default()).unwrap();
        let integral: f64 = g.nodes().iter().zip(g.weights()).map(|(x, w)| w * x.sin()).sum();
        assert!((integral - (1.0 - 4f64.cos())).abs() < 1e-13);
        let values: Vec<f64> = g.nodes().iter().map(|x| x.exp()).collect();
        for r in [0.3, 1.0, 2.71, 4.0] {
            assert!((g.interpolate(&values, r) - r.exp()).abs() < 1e-12 * r.exp());
        }
    }

    #[test]
    fn probe_partial_integrals() {
        let g = RadialGrid::new(4.0, 4.0, 1, &GridSpec::default()).unwrap();
        let r = 2.3;
        let p = g.probe(r);
        let (a, _) = g.panel(p.panel);
        let vals: Vec<f64> = g.nodes()[g.panel_nodes(p.panel)].iter().map(|x| x * x).collect();
        let left: f64 = p.left.iter().zip(&vals).map(|(w, v)| w * v).sum();
        assert!((left - (r * r * r - a * a * a) / 3.0).abs() < 1e-13);
        let with_log: f64 = p.left_log.iter().zip(&vals).map(|(w, v)| w * v).sum();
        // ∫_a^r s² ln(r/s) ds = (r³ − a³)/9 − a³ ln(r/a)/3
        let exact = (r * r * r - a * a * a) / 9.0 - a * a * a * (r / a).ln() / 3.0;
        assert!((with_log - exact).abs() < 1e-13);
    }
}
