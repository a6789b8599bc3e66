//! Empirical decay checks on the mode sums of a series solution.

use alloc::vec::Vec;

use super::{Parity, SeriesSolution, SpectralError, WeightExponents};
use crate::math;

/// Slack allowed on fitted exponents before a bound counts as violated.
pub const EXPONENT_SLACK: f64 = 0.3;
/// Relative change in partial sums under doubling that flags truncation.
pub const DOUBLING_BUDGET: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub all_zero: bool,
    /// sup over r ≤ 1 of Σ_m |R_{m0}(r)|.
    pub angular_sup_inner: f64,
    /// Fitted growth exponent of Σ_m |R_{m0}| on [1, L].
    pub angular_outer_exponent: Option<f64>,
    /// Fitted exponent of Σ_n n²|R_{0n}| on [1e-3, 1e-1].
    pub periodic_edge_exponent: Option<f64>,
    /// Fitted exponent of Σ_{m,n} n²|R_{mn}| on [1e-3, 1e-1].
    pub mixed_edge_exponent: Option<f64>,
    pub expected_angular_outer: f64,
    pub expected_periodic_edge: f64,
    pub expected_mixed_edge: f64,
    /// Every fitted exponent is on the admissible side of its bound.
    pub within_bounds: bool,
    /// Largest relative change of the three sums against the doubled run.
    pub doubling_change: Option<f64>,
    pub truncation_insufficient: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    angular: f64,
    periodic: f64,
    mixed: f64,
}

fn sums_at(series: &SeriesSolution, r: f64) -> Result<Sums, SpectralError> {
    let samples = series.radial_samples(r)?;
    let mut s = Sums::default();
    for (key, sample) in series.keys().iter().zip(&samples) {
        let weight = (key.n * key.n) as f64 * math::abs(sample.value);
        match (key.m, key.n) {
            (0, 0) => {}
            (_, 0) if key.parity == Parity::Cos => s.angular += math::abs(sample.value),
            (0, _) => s.periodic += weight,
            _ => s.mixed += weight,
        }
    }
    Ok(s)
}

fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (math::ln(lo), math::ln(hi));
    (0..count).map(|k| math::exp(a + (b - a) * k as f64 / (count - 1) as f64)).collect()
}

fn fit(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if ys.iter().all(|&y| y > 0.0 && y.is_finite()) {
        Some(math::fit_log_log(xs, ys))
    } else {
        None
    }
}

pub fn tail_diagnostics(
    series: &SeriesSolution,
    doubled: Option<&SeriesSolution>,
    weights: &WeightExponents,
) -> Result<TailReport, SpectralError> {
    let edge_r = log_space(1e-3, 1e-1, 9);
    let outer_r = log_space(1.0, series.domain.length(), 9);
    let edge: Vec<Sums> = edge_r.iter().map(|&r| sums_at(series, r)).collect::<Result<_, _>>()?;
    let outer: Vec<Sums> = outer_r.iter().map(|&r| sums_at(series, r)).collect::<Result<_, _>>()?;
    let inner_r = log_space(1e-4, 1.0, 9);
    let mut angular_sup_inner: f64 = 0.0;
    for &r in &inner_r {
        angular_sup_inner = angular_sup_inner.max(sums_at(series, r)?.angular);
    }
    let all_zero = series.modes().iter().all(|m| m.source().iter().all(|&f| f == 0.0));
    let periodic: Vec<f64> = edge.iter().map(|s| s.periodic).collect();
    let mixed: Vec<f64> = edge.iter().map(|s| s.mixed).collect();
    let angular: Vec<f64> = outer.iter().map(|s| s.angular).collect();
    let periodic_edge_exponent = fit(&edge_r, &periodic);
    let mixed_edge_exponent = fit(&edge_r, &mixed);
    let angular_outer_exponent = fit(&outer_r, &angular);
    let delta = weights.delta();
    let expected_periodic_edge = delta - 2.5;
    let expected_mixed_edge = delta.min(0.5) - 2.5;
    let expected_angular_outer = weights.delta0();
    // The decay statements are upper bounds: near the edge the sums may grow no
    // faster than the stated power, so the fitted exponent may exceed it.
    let within_bounds = periodic_edge_exponent.map_or(true, |e| e >= expected_periodic_edge - EXPONENT_SLACK)
        && mixed_edge_exponent.map_or(true, |e| e >= expected_mixed_edge - EXPONENT_SLACK)
        && angular_outer_exponent.map_or(true, |e| e <= expected_angular_outer + EXPONENT_SLACK)
        && angular_sup_inner.is_finite();
    let doubling_change = match doubled {
        Some(other) => {
            let mut change: f64 = 0.0;
            for &r in edge_r.iter().chain(&outer_r) {
                let (a, b) = (sums_at(series, r)?, sums_at(other, r)?);
                for (x, y) in [(a.angular, b.angular), (a.periodic, b.periodic), (a.mixed, b.mixed)] {
                    if y != 0.0 {
                        change = change.max(math::abs(y - x) / math::abs(y));
                    } else if x != 0.0 {
                        change = f64::INFINITY;
                    }
                }
            }
            Some(change)
        }
        None => None,
    };
    Ok(TailReport {
        all_zero,
        angular_sup_inner,
        angular_outer_exponent,
        periodic_edge_exponent,
        mixed_edge_exponent,
        expected_angular_outer,
        expected_periodic_edge,
        expected_mixed_edge,
        within_bounds,
        truncation_insufficient: doubling_change.map_or(false, |c| c > DOUBLING_BUDGET),
        doubling_change,
    })
}
