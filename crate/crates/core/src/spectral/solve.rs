//! Full cut-off solve and evaluation of the assembled series.

use alloc::vec;
use alloc::vec::Vec;

use super::lift::{neumann_lift, BoundaryDatum};
use super::project::{basis_value, project_modes, AngularRule, ModeTable, Source};
use super::radial::{radial_00, radial_bessel, radial_m0, BesselTable, RadialMode, RadialSample};
use super::{GridSpec, ModeKey, Parity, RadialGrid, SpectralError, Truncation, WedgeDomain};
use crate::bessel::LogBessel;
use crate::math;
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffOptions {
    pub grid: GridSpec,
    /// θ quadrature nodes; defaults to 6M + 24.
    pub theta_nodes: Option<usize>,
    /// y₂ trapezoid nodes; defaults to 4N + 8.
    pub y_nodes: Option<usize>,
}

impl Default for CutoffOptions {
    fn default() -> Self {
        Self { grid: GridSpec::default(), theta_nodes: None, y_nodes: None }
    }
}

impl CutoffOptions {
    pub fn angular_rule(&self, domain: &WedgeDomain, trunc: &Truncation) -> AngularRule {
        AngularRule::with_counts(
            domain,
            trunc,
            self.theta_nodes.unwrap_or(6 * trunc.m_max + 24),
            self.y_nodes.unwrap_or(4 * trunc.n_max + 8),
        )
    }

    pub fn radial_grid(&self, domain: &WedgeDomain, trunc: &Truncation) -> Result<RadialGrid, SpectralError> {
        RadialGrid::new(domain.length(), domain.angular_order(trunc.m_max), trunc.n_max, &self.grid)
    }
}

/// Truncated series solution v_L.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolution {
    pub domain: WedgeDomain,
    pub truncation: Truncation,
    pub grid: RadialGrid,
    keys: Vec<ModeKey>,
    modes: Vec<RadialMode>,
    /// −Σ_n R_{0n}^{(2)}(0).
    pub pinned_edge_value: f64,
    pub c_l: f64,
    /// Sup of the projected source over the tensor grid.
    pub source_sup: f64,
    /// Fraction of source energy outside the retained modes.
    pub energy_loss: f64,
}

/// Value, gradient (∂_r, ∂_θ, ∂_y₂) and Hessian in (r, θ, y₂) coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldSample {
    pub value: f64,
    pub gradient: [f64; 3],
    pub hessian: [[f64; 3]; 3],
}

impl FieldSample {
    /// Δv = v_rr + v_r/r + v_θθ/r² + v_yy.
    pub fn laplacian(&self, r: f64) -> f64 {
        self.hessian[0][0] + self.gradient[0] / r + self.hessian[1][1] / (r * r) + self.hessian[2][2]
    }
}

/// Lift, project and solve every retained mode.
pub fn solve_cutoff(
    source: &dyn Source,
    lower: &dyn BoundaryDatum,
    upper: &dyn BoundaryDatum,
    domain: &WedgeDomain,
    trunc: &Truncation,
    options: &CutoffOptions,
) -> Result<SeriesSolution, SpectralError> {
    let lift = neumann_lift(lower, upper, domain);
    let lifted = |r: f64, theta: f64, y2: f64| source.value(r, theta, y2) - lift.sample(r, theta, y2).laplacian;
    let grid = options.radial_grid(domain, trunc)?;
    let rule = options.angular_rule(domain, trunc);
    let table = project_modes(&lifted, domain, trunc, &grid, &rule)?;
    solve_modes(&table)
}

/// Solve the radial problems for an already projected source.
pub fn solve_modes(table: &ModeTable) -> Result<SeriesSolution, SpectralError> {
    let trunc = table.truncation;
    let domain = table.domain;
    let grid = &table.grid;
    let keys = trunc.keys();
    let profile = |m: usize, n: usize, parity: Parity| {
        table.profile(ModeKey { m, n, parity }).expect("key within truncation")
    };
    let pairs = (trunc.m_max + 1) * (trunc.n_max + 1);
    let solved = par::map_indexed(pairs, |idx| -> Result<Vec<RadialMode>, SpectralError> {
        let (m, n) = (idx / (trunc.n_max + 1), idx % (trunc.n_max + 1));
        match (m, n) {
            (0, 0) => Ok(vec![radial_00(grid, profile(0, 0, Parity::Cos), table.c_l, 0.0)?]),
            (_, 0) => Ok(vec![radial_m0(grid, profile(m, 0, Parity::Cos), m, &domain)?]),
            _ => {
                let bessel = alloc::sync::Arc::new(BesselTable::new(grid, domain.angular_order(m), n as f64)?);
                Ok(vec![
                    radial_bessel(grid, profile(m, n, Parity::Sin), bessel.clone())?,
                    radial_bessel(grid, profile(m, n, Parity::Cos), bessel)?,
                ])
            }
        }
    });
    let mut modes = Vec::with_capacity(keys.len());
    for group in solved {
        modes.extend(group?);
    }
    let mut pinned = 0.0;
    for (key, mode) in keys.iter().zip(&modes) {
        if key.m == 0 && key.n > 0 && key.parity == Parity::Cos {
            pinned -= mode.value_at_origin();
        }
    }
    modes[0].set_pin(pinned);
    Ok(SeriesSolution {
        domain,
        truncation: trunc,
        grid: grid.clone(),
        keys,
        modes,
        pinned_edge_value: pinned,
        c_l: table.c_l,
        source_sup: table.sup_norm,
        energy_loss: table.energy_loss,
    })
}

/// Evaluate the series at one point; `order` ∈ {0, 1, 2} selects how many
/// derivatives are filled in.
pub fn assemble(series: &SeriesSolution, r: f64, theta: f64, y2: f64, order: u8) -> Result<FieldSample, SpectralError> {
    if !series.domain.contains(r, theta) {
        return Err(SpectralError::OutOfDomain { r, theta });
    }
    if r == 0.0 {
        if order > 0 {
            return Err(SpectralError::DerivativeAtEdge);
        }
        let samples: Vec<RadialSample> =
            series.modes.iter().map(|m| RadialSample { value: m.value_at_origin(), d1: 0.0, d2: 0.0 }).collect();
        return Ok(series.combine(&samples, theta, y2, 0));
    }
    let samples = series.radial_samples(r)?;
    Ok(series.combine(&samples, theta, y2, order))
}

impl SeriesSolution {
    pub fn keys(&self) -> &[ModeKey] {
        &self.keys
    }

    pub fn modes(&self) -> &[RadialMode] {
        &self.modes
    }

    pub fn mode(&self, key: ModeKey) -> Option<&RadialMode> {
        ModeTable::key_index(&self.truncation, key).map(|i| &self.modes[i])
    }

    /// R, R′, R″ of every mode at 0 < r ≤ L, in key order.
    pub fn radial_samples(&self, r: f64) -> Result<Vec<RadialSample>, SpectralError> {
        let length = self.domain.length();
        if !(r > 0.0 && r <= length * (1.0 + 1e-12)) {
            return Err(SpectralError::OutOfDomain { r, theta: f64::NAN });
        }
        let probe = self.grid.probe(r.min(length));
        let mut out = Vec::with_capacity(self.modes.len());
        let mut cached: Option<LogBessel> = None;
        for (key, mode) in self.keys.iter().zip(&self.modes) {
            let at_r = match mode.table() {
                Some(table) => {
                    // Sin and cos modes of a pair share the Bessel data.
                    if key.parity == Parity::Sin || cached.is_none() {
                        cached = Some(table.at(probe.r)?);
                    }
                    cached.as_ref()
                }
                None => None,
            };
            out.push(mode.eval_probe(&self.grid, &probe, at_r)?);
        }
        Ok(out)
    }

    /// Sum the modes at fixed r in ascending (m, n) order.
    pub fn combine(&self, samples: &[RadialSample], theta: f64, y2: f64, order: u8) -> FieldSample {
        combine_modes(&self.domain, &self.keys, samples, theta, y2, order)
    }

    /// Σ F_key(r)·Φ_key(θ, y₂): the projected source the series solves exactly.
    pub fn projected_source(&self, r: f64, theta: f64, y2: f64) -> f64 {
        let mut total = 0.0;
        for (key, mode) in self.keys.iter().zip(&self.modes) {
            total += self.grid.interpolate(mode.source(), r) * basis_value(&self.domain, *key, theta, y2);
        }
        total
    }

    /// R_{m0}(0) + Σ_n R_{mn}^{(2)}(0) for m = 0..=M.
    pub fn edge_identity_residuals(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.truncation.m_max + 1];
        for (key, mode) in self.keys.iter().zip(&self.modes) {
            if key.parity == Parity::Cos {
                sums[key.m] += mode.value_at_origin();
            }
        }
        sums
    }

    /// Residuals of the assembled field on a verification grid with
    /// `counts = (n_r, n_θ, n_y)` points.
    pub fn residuals(&self, source: Option<&dyn Source>, counts: (usize, usize, usize)) -> Result<ResidualReport, SpectralError> {
        let (nr, nt, ny) = counts;
        let length = self.domain.length();
        let theta0 = self.domain.theta0();
        let width = self.domain.aperture();
        let step = 1e-3;
        let radii: Vec<f64> = (0..nr).map(|i| length * (i as f64 + 0.5) / nr as f64).collect();
        let thetas: Vec<f64> = (0..nt).map(|j| theta0 + width * (j as f64 + 0.5) / nt as f64).collect();
        let ys: Vec<f64> = (0..ny).map(|k| math::TAU * k as f64 / ny as f64).collect();
        struct Row {
            sup_v: f64,
            sup_grad: f64,
            pde: f64,
            pde_fd: f64,
            lower: f64,
            upper: f64,
        }
        let rows = par::map_slice(&radii, |&r| -> Result<Row, SpectralError> {
            let centre = self.radial_samples(r)?;
            let stencil: Vec<Vec<RadialSample>> = [-2.0, -1.0, 1.0, 2.0]
                .iter()
                .map(|k| self.radial_samples(r + k * step))
                .collect::<Result<_, _>>()?;
            let mut row = Row { sup_v: 0.0, sup_grad: 0.0, pde: 0.0, pde_fd: 0.0, lower: 0.0, upper: 0.0 };
            for &y in &ys {
                for &theta in &thetas {
                    let s = self.combine(&centre, theta, y, 2);
                    row.sup_v = row.sup_v.max(math::abs(s.value));
                    row.sup_grad = row.sup_grad.max(s.gradient.iter().fold(0.0f64, |a, &g| a.max(math::abs(g))));
                    let value = |samples: &[RadialSample], t: f64, yy: f64| self.combine(samples, t, yy, 0).value;
                    let radial: Vec<f64> = stencil.iter().map(|smp| value(smp, theta, y)).collect();
                    let v0 = s.value;
                    let v_rr = (-radial[0] + 16.0 * radial[1] - 30.0 * v0 + 16.0 * radial[2] - radial[3]) / (12.0 * step * step);
                    let v_r = (radial[0] - 8.0 * radial[1] + 8.0 * radial[2] - radial[3]) / (12.0 * step);
                    let second = |f: &dyn Fn(f64) -> f64| {
                        (-f(2.0 * step) + 16.0 * f(step) - 30.0 * v0 + 16.0 * f(-step) - f(-2.0 * step)) / (12.0 * step * step)
                    };
                    let v_tt = second(&|e| value(&centre, theta + e, y));
                    let v_yy = second(&|e| value(&centre, theta, y + e));
                    let fd = v_rr + v_r / r + v_tt / (r * r) + v_yy;
                    let target = match source {
                        Some(f) => f.value(r, theta, y),
                        None => self.projected_source(r, theta, y),
                    };
                    row.pde = row.pde.max(math::abs(self.projected_source(r, theta, y) - target));
                    row.pde_fd = row.pde_fd.max(math::abs(fd - target));
                }
                row.lower = row.lower.max(math::abs(self.combine(&centre, theta0, y, 1).gradient[1]));
                row.upper = row.upper.max(math::abs(self.combine(&centre, math::FRAC_PI_2, y, 1).gradient[1]));
            }
            Ok(row)
        });
        let outer_samples = self.radial_samples(length)?;
        let mut outer: f64 = 0.0;
        for &y in &ys {
            for &theta in &thetas {
                let s = self.combine(&outer_samples, theta, y, 1);
                outer = outer.max(math::abs(s.gradient[0] - self.c_l));
            }
        }
        let mut edge: f64 = 0.0;
        for &theta in &thetas {
            edge = edge.max(math::abs(assemble(self, 0.0, theta, 0.0, 0)?.value));
        }
        let (mut sup_v, mut sup_grad, mut pde, mut pde_fd, mut lower, mut upper) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for row in rows {
            let row = row?;
            sup_v = sup_v.max(row.sup_v);
            sup_grad = sup_grad.max(row.sup_grad);
            pde = pde.max(row.pde);
            pde_fd = pde_fd.max(row.pde_fd);
            lower = lower.max(row.lower);
            upper = upper.max(row.upper);
        }
        let source_scale = self.source_sup.max(f64::MIN_POSITIVE);
        let grad_scale = sup_grad.max(sup_v / length).max(f64::MIN_POSITIVE);
        Ok(ResidualReport {
            pde: pde / source_scale,
            pde_fd: pde_fd / source_scale,
            neumann_lower: lower / grad_scale,
            neumann_upper: upper / grad_scale,
            outer: outer / grad_scale,
            edge: edge / sup_v.max(1.0),
            sup_value: sup_v,
            sup_gradient: sup_grad,
        })
    }
}

/// Scaled residuals: PDE ones by sup|f|, boundary ones by the gradient scale,
/// the edge value by max(1, sup|v|).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// Projected source against the true source (truncation error).
    pub pde: f64,
    /// Finite-difference Laplacian of the assembled field against the source.
    pub pde_fd: f64,
    pub neumann_lower: f64,
    pub neumann_upper: f64,
    pub outer: f64,
    pub edge: f64,
    pub sup_value: f64,
    pub sup_gradient: f64,
}

impl ResidualReport {
    pub fn passes(&self) -> bool {
        self.pde <= super::TOL_PDE
            && self.pde_fd <= super::TOL_PDE
            && self.neumann_lower <= super::TOL_BC
            && self.neumann_upper <= super::TOL_BC
            && self.outer <= super::TOL_BC
            && self.edge <= super::TOL_EDGE
    }
}

/// Σ R_key(r)·Φ_key(θ, y₂) with derivatives up to `order`, summed in key order.
pub(crate) fn combine_modes(
    domain: &WedgeDomain,
    keys: &[ModeKey],
    samples: &[RadialSample],
    theta: f64,
    y2: f64,
    order: u8,
) -> FieldSample {
    let theta0 = domain.theta0();
    let mut out = FieldSample::default();
    for (key, s) in keys.iter().zip(samples) {
        let p = domain.angular_order(key.m);
        let n = key.n as f64;
        let (ang, ang_d) = (math::cos(p * (theta - theta0)), -p * math::sin(p * (theta - theta0)));
        let (per, per_d) = match key.parity {
            Parity::Sin => (math::sin(n * y2), n * math::cos(n * y2)),
            Parity::Cos => (math::cos(n * y2), -n * math::sin(n * y2)),
        };
        out.value += s.value * ang * per;
        if order >= 1 {
            out.gradient[0] += s.d1 * ang * per;
            out.gradient[1] += s.value * ang_d * per;
            out.gradient[2] += s.value * ang * per_d;
        }
        if order >= 2 {
            let h = &mut out.hessian;
            h[0][0] += s.d2 * ang * per;
            h[0][1] += s.d1 * ang_d * per;
            h[0][2] += s.d1 * ang * per_d;
            h[1][1] += -p * p * s.value * ang * per;
            h[1][2] += s.value * ang_d * per_d;
            h[2][2] += -n * n * s.value * ang * per;
        }
    }
    if order >= 2 {
        let h = &mut out.hessian;
        h[1][0] = h[0][1];
        h[2][0] = h[0][2];
        h[2][1] = h[1][2];
    }
    out
}
