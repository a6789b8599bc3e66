//! Radial two-point problems R″ + R′/r − (p²/r² + n²)R = F on (0, L) with R
//! bounded at 0 and R′(L) = 0 (or R′(L) = c_L for the mean mode).
//!
//! Each solution is written through its Green's function. The running
//! integrals are stored at panel breakpoints divided by the kernel value at
//! that breakpoint, so they stay O(1) no matter how large I_p(nr) or r^p get.
//! Inside a panel the normalized integrand is interpolated and integrated
//! against partial Lagrange weights, which costs one Bessel call per (p, n)
//! per evaluation radius.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{Probe, RadialGrid, SpectralError, WedgeDomain};
use crate::bessel::{self, LogBessel};
use crate::math;

/// Relative tolerance of the compatibility check on the mean mode.
pub const COMPAT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeKind {
    /// (0, 0): R″ + R′/r = F.
    Constant,
    /// (m, 0): kernels r^{±p}.
    Angular { order: f64 },
    /// (0, n): kernels I₀(nr), K₀(nr).
    Periodic { freq: f64 },
    /// (m, n): kernels I_p(nr), K_p(nr).
    Mixed { order: f64, freq: f64 },
}

impl ModeKind {
    pub fn order(&self) -> f64 {
        match *self {
            ModeKind::Angular { order } | ModeKind::Mixed { order, .. } => order,
            _ => 0.0,
        }
    }

    pub fn freq(&self) -> f64 {
        match *self {
            ModeKind::Periodic { freq } | ModeKind::Mixed { freq, .. } => freq,
            _ => 0.0,
        }
    }
}

/// R, R′, R″ at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RadialSample {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// ln I_p(n·), ln K_p(n·) on the grid nodes and breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BesselTable {
    order: f64,
    freq: f64,
    ln_i: Vec<f64>,
    ln_k: Vec<f64>,
    ln_i_break: Vec<f64>,
    ln_k_break: Vec<f64>,
    i_ratio_end: f64,
    k_ratio_end: f64,
}

impl BesselTable {
    pub(crate) fn new(grid: &RadialGrid, order: f64, freq: f64) -> Result<Self, SpectralError> {
        let mut ln_i = Vec::with_capacity(grid.nodes().len());
        let mut ln_k = Vec::with_capacity(grid.nodes().len());
        for &x in grid.nodes() {
            let e = bessel::log_eval(order, freq * x)?;
            ln_i.push(e.ln_i);
            ln_k.push(e.ln_k);
        }
        let mut ln_i_break = vec![f64::NAN];
        let mut ln_k_break = vec![f64::NAN];
        let mut end = None;
        for &b in &grid.breaks()[1..] {
            let e = bessel::log_eval(order, freq * b)?;
            ln_i_break.push(e.ln_i);
            ln_k_break.push(e.ln_k);
            end = Some(e);
        }
        let end = end.expect("grid has at least one panel");
        Ok(Self { order, freq, ln_i, ln_k, ln_i_break, ln_k_break, i_ratio_end: end.i_ratio, k_ratio_end: end.k_ratio })
    }

    pub(crate) fn at(&self, r: f64) -> Result<LogBessel, SpectralError> {
        Ok(bessel::log_eval(self.order, self.freq * r)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kernel {
    Log { x_cum: Vec<f64>, z_cum: Vec<f64>, pin: f64 },
    Power { p_cum: Vec<f64>, q_cum: Vec<f64> },
    Bessel { table: Arc<BesselTable>, a_cum: Vec<f64>, b_cum: Vec<f64>, origin: f64, end_coef: f64 },
}

/// One solved radial mode.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMode {
    kind: ModeKind,
    source: Vec<f64>,
    kernel: Kernel,
}

fn pow_ratio(x: f64, y: f64, p: f64) -> f64 {
    // (x/y)^p in log form; 0 when x = 0.
    if x == 0.0 {
        0.0
    } else {
        math::exp(p * math::ln(x / y))
    }
}

fn check_profile(grid: &RadialGrid, f: &[f64]) -> Result<(), SpectralError> {
    if f.len() != grid.nodes().len() {
        return Err(SpectralError::InvalidGrid("profile length does not match grid"));
    }
    if let Some(k) = f.iter().position(|v| !v.is_finite()) {
        return Err(SpectralError::NonFiniteSource { r: grid.nodes()[k], theta: f64::NAN, y2: f64::NAN });
    }
    Ok(())
}

/// Mean mode: R₀₀ = pinned + ∫₀^r η⁻¹∫₀^η ξF dξ dη, with R₀₀′(L) = c_L.
pub fn radial_00(grid: &RadialGrid, f00: &[f64], c_l: f64, pinned: f64) -> Result<RadialMode, SpectralError> {
    check_profile(grid, f00)?;
    let panels = grid.panel_count();
    let mut x_cum = vec![0.0; panels + 1];
    let mut z_cum = vec![0.0; panels + 1];
    let mut scale: f64 = 0.0;
    for j in 0..panels {
        let (a, b) = grid.panel(j);
        let range = grid.panel_nodes(j);
        let (mut sx, mut sz) = (0.0, 0.0);
        for ((&x, &w), &f) in grid.nodes()[range.clone()].iter().zip(&grid.weights()[range.clone()]).zip(&f00[range]) {
            sx += w * x * f;
            sz += w * x * f * math::ln(b / x);
            scale = scale.max(math::abs(f));
        }
        x_cum[j + 1] = x_cum[j] + sx;
        let carry = if a > 0.0 { x_cum[j] * math::ln(b / a) } else { 0.0 };
        z_cum[j + 1] = z_cum[j] + carry + sz;
    }
    let length = grid.length();
    let defect = length * c_l - x_cum[panels];
    let tolerance = COMPAT_TOLERANCE * (math::abs(length * c_l).max(0.5 * scale * length * length)).max(f64::MIN_POSITIVE);
    if math::abs(defect) > tolerance {
        return Err(SpectralError::CompatibilityViolation { defect, tolerance });
    }
    Ok(RadialMode { kind: ModeKind::Constant, source: f00.to_vec(), kernel: Kernel::Log { x_cum, z_cum, pin: pinned } })
}

/// (m, 0) mode with √μ_m = p > 0.
pub fn radial_m0(grid: &RadialGrid, fm0: &[f64], m: usize, domain: &WedgeDomain) -> Result<RadialMode, SpectralError> {
    if m == 0 {
        return Err(SpectralError::InvalidTruncation);
    }
    check_profile(grid, fm0)?;
    let p = domain.angular_order(m);
    let panels = grid.panel_count();
    let mut p_cum = vec![0.0; panels + 1];
    let mut q_cum = vec![0.0; panels + 1];
    for j in 0..panels {
        let (a, b) = grid.panel(j);
        let range = grid.panel_nodes(j);
        let mut s = 0.0;
        for ((&x, &w), &f) in grid.nodes()[range.clone()].iter().zip(&grid.weights()[range.clone()]).zip(&fm0[range]) {
            s += w * x * f * pow_ratio(x, b, p);
        }
        p_cum[j + 1] = pow_ratio(a, b, p) * p_cum[j] + s;
    }
    for j in (1..panels).rev() {
        let (a, b) = grid.panel(j);
        let range = grid.panel_nodes(j);
        let mut s = 0.0;
        for ((&x, &w), &f) in grid.nodes()[range.clone()].iter().zip(&grid.weights()[range.clone()]).zip(&fm0[range]) {
            s += w * x * f * pow_ratio(a, x, p);
        }
        q_cum[j] = pow_ratio(a, b, p) * q_cum[j + 1] + s;
    }
    Ok(RadialMode { kind: ModeKind::Angular { order: p }, source: fm0.to_vec(), kernel: Kernel::Power { p_cum, q_cum } })
}

/// (0, n) mode, n ≥ 1.
pub fn radial_0n(grid: &RadialGrid, f0n: &[f64], n: usize) -> Result<RadialMode, SpectralError> {
    if n == 0 {
        return Err(SpectralError::InvalidTruncation);
    }
    let table = Arc::new(BesselTable::new(grid, 0.0, n as f64)?);
    radial_bessel(grid, f0n, table)
}

/// (m, n) mode, m, n ≥ 1.
pub fn radial_mn(
    grid: &RadialGrid,
    fmn: &[f64],
    m: usize,
    n: usize,
    domain: &WedgeDomain,
) -> Result<RadialMode, SpectralError> {
    if m == 0 || n == 0 {
        return Err(SpectralError::InvalidTruncation);
    }
    let table = Arc::new(BesselTable::new(grid, domain.angular_order(m), n as f64)?);
    radial_bessel(grid, fmn, table)
}

pub(crate) fn radial_bessel(grid: &RadialGrid, f: &[f64], table: Arc<BesselTable>) -> Result<RadialMode, SpectralError> {
    check_profile(grid, f)?;
    let panels = grid.panel_count();
    let mut a_cum = vec![0.0; panels + 1];
    let mut b_cum = vec![0.0; panels + 1];
    for j in 0..panels {
        let range = grid.panel_nodes(j);
        let ln_ib = table.ln_i_break[j + 1];
        let mut s = 0.0;
        for k in range {
            s += grid.weights()[k] * grid.nodes()[k] * f[k] * math::exp(table.ln_i[k] - ln_ib);
        }
        let carry = if j == 0 { 0.0 } else { math::exp(table.ln_i_break[j] - ln_ib) * a_cum[j] };
        a_cum[j + 1] = carry + s;
    }
    for j in (1..panels).rev() {
        let range = grid.panel_nodes(j);
        let ln_ka = table.ln_k_break[j];
        let mut s = 0.0;
        for k in range {
            s += grid.weights()[k] * grid.nodes()[k] * f[k] * math::exp(table.ln_k[k] - ln_ka);
        }
        b_cum[j] = math::exp(table.ln_k_break[j + 1] - ln_ka) * b_cum[j + 1] + s;
    }
    let end_coef = table.k_ratio_end / table.i_ratio_end * a_cum[panels];
    let ln_k_end = table.ln_k_break[panels];
    let origin = if table.order == 0.0 {
        // R(0) = −∫₀^L ξK₀(nξ)F dξ + (K₀′/I₀′)(nL)·∫₀^L ξI₀(nξ)F dξ
        let mut near = 0.0;
        for k in grid.panel_nodes(0) {
            near += grid.weights()[k] * grid.nodes()[k] * f[k] * math::exp(table.ln_k[k]);
        }
        let raw = near + if panels > 1 { math::exp(table.ln_k_break[1]) * b_cum[1] } else { 0.0 };
        -raw + end_coef * math::exp(ln_k_end)
    } else {
        0.0
    };
    let kind = if table.order == 0.0 {
        ModeKind::Periodic { freq: table.freq }
    } else {
        ModeKind::Mixed { order: table.order, freq: table.freq }
    };
    Ok(RadialMode { kind, source: f.to_vec(), kernel: Kernel::Bessel { table, a_cum, b_cum, origin, end_coef } })
}

impl RadialMode {
    pub fn kind(&self) -> ModeKind {
        self.kind
    }

    pub fn source(&self) -> &[f64] {
        &self.source
    }

    pub(crate) fn table(&self) -> Option<&Arc<BesselTable>> {
        match &self.kernel {
            Kernel::Bessel { table, .. } => Some(table),
            _ => None,
        }
    }

    pub(crate) fn set_pin(&mut self, value: f64) {
        if let Kernel::Log { pin, .. } = &mut self.kernel {
            *pin = value;
        }
    }

    /// R(0); zero except for the mean mode and the (0, n) modes.
    pub fn value_at_origin(&self) -> f64 {
        match &self.kernel {
            Kernel::Log { pin, .. } => *pin,
            Kernel::Power { .. } => 0.0,
            Kernel::Bessel { origin, .. } => *origin,
        }
    }

    /// R, R′, R″ at 0 < r ≤ L.
    pub fn eval(&self, grid: &RadialGrid, r: f64) -> Result<RadialSample, SpectralError> {
        if !(r > 0.0 && r <= grid.length() * (1.0 + 1e-12)) {
            return Err(SpectralError::OutOfDomain { r, theta: f64::NAN });
        }
        let probe = grid.probe(r.min(grid.length()));
        let bessel_at_r = match self.table() {
            Some(t) => Some(t.at(probe.r)?),
            None => None,
        };
        self.eval_probe(grid, &probe, bessel_at_r.as_ref())
    }

    /// Evaluation with a precomputed probe and, for Bessel modes, the Bessel
    /// data at (p, n·r).
    pub(crate) fn eval_probe(
        &self,
        grid: &RadialGrid,
        probe: &Probe,
        at_r: Option<&LogBessel>,
    ) -> Result<RadialSample, SpectralError> {
        let r = probe.r;
        let j = probe.panel;
        let range = grid.panel_nodes(j);
        let xs = &grid.nodes()[range.clone()];
        let fs = &self.source[range];
        let forcing: f64 = probe.basis.iter().zip(fs).map(|(b, f)| b * f).sum();
        let (a, b) = grid.panel(j);
        let length = grid.length();
        let (value, d1) = match &self.kernel {
            Kernel::Log { x_cum, z_cum, pin } => {
                let (x, z) = if j == 0 {
                    let (mut x, mut z) = (0.0, 0.0);
                    for (s, w) in grid.sub_rule(0.0, r) {
                        let g = w * s * grid.interpolate(&self.source, s);
                        x += g;
                        z += g * math::ln(r / s);
                    }
                    (x, z)
                } else {
                    let mut x = x_cum[j];
                    let mut z = z_cum[j] + x_cum[j] * math::ln(r / a);
                    for l in 0..xs.len() {
                        x += probe.left[l] * xs[l] * fs[l];
                        z += probe.left_log[l] * xs[l] * fs[l];
                    }
                    (x, z)
                };
                (pin + z, x / r)
            }
            Kernel::Power { p_cum, q_cum } => {
                let p = self.kind.order();
                let (pp, qq) = if j == 0 {
                    let mut pp = 0.0;
                    for (s, w) in grid.sub_rule(0.0, r) {
                        pp += w * s * grid.interpolate(&self.source, s) * pow_ratio(s, r, p);
                    }
                    let mut qq = pow_ratio(r, b, p) * q_cum[1];
                    if r < b {
                        for (s, w) in grid.sub_rule(r, b) {
                            qq += w * s * grid.interpolate(&self.source, s) * pow_ratio(r, s, p);
                        }
                    }
                    (pp, qq)
                } else {
                    let (mut sp, mut sq) = (0.0, 0.0);
                    for l in 0..xs.len() {
                        sp += probe.left[l] * xs[l] * fs[l] * pow_ratio(xs[l], b, p);
                        sq += probe.right[l] * xs[l] * fs[l] * pow_ratio(a, xs[l], p);
                    }
                    (
                        pow_ratio(a, r, p) * p_cum[j] + pow_ratio(b, r, p) * sp,
                        pow_ratio(r, b, p) * q_cum[j + 1] + pow_ratio(r, a, p) * sq,
                    )
                };
                let end = pow_ratio(r, length, p) * p_cum[p_cum.len() - 1];
                (-(pp + qq + end) / (2.0 * p), (pp - qq - end) / (2.0 * r))
            }
            Kernel::Bessel { table, a_cum, b_cum, end_coef, .. } => {
                let at_r = at_r.expect("Bessel data at r required");
                let n = self.kind.freq();
                let (ln_ir, ln_kr) = (at_r.ln_i, at_r.ln_k);
                let (a_hat, b_hat) = if j == 0 {
                    let mut ah = 0.0;
                    for (s, w) in grid.sub_rule(0.0, r) {
                        let e = table.at(s)?;
                        ah += w * s * grid.interpolate(&self.source, s) * math::exp(e.ln_i - ln_ir);
                    }
                    let mut bh = math::exp(table.ln_k_break[1] - ln_kr) * b_cum[1];
                    if r < b {
                        for (s, w) in grid.sub_rule(r, b) {
                            let e = table.at(s)?;
                            bh += w * s * grid.interpolate(&self.source, s) * math::exp(e.ln_k - ln_kr);
                        }
                    }
                    (ah, bh)
                } else {
                    let range = grid.panel_nodes(j);
                    let ln_ib = table.ln_i_break[j + 1];
                    let ln_ka = table.ln_k_break[j];
                    let (mut si, mut sk) = (0.0, 0.0);
                    for (l, k) in range.enumerate() {
                        let g = xs[l] * fs[l];
                        si += probe.left[l] * g * math::exp(table.ln_i[k] - ln_ib);
                        sk += probe.right[l] * g * math::exp(table.ln_k[k] - ln_ka);
                    }
                    (
                        math::exp(table.ln_i_break[j] - ln_ir) * a_cum[j] + math::exp(ln_ib - ln_ir) * si,
                        math::exp(table.ln_k_break[j + 1] - ln_kr) * b_cum[j + 1] + math::exp(ln_ka - ln_kr) * sk,
                    )
                };
                let product = math::exp(ln_ir + ln_kr);
                let last = table.ln_k_break.len() - 1;
                let third = end_coef * math::exp(ln_ir + table.ln_k_break[last]);
                let value = -product * (a_hat + b_hat) + third;
                let d1 = n * (-product * (at_r.k_ratio * a_hat + at_r.i_ratio * b_hat) + at_r.i_ratio * third);
                (value, d1)
            }
        };
        let p = self.kind.order();
        let n = self.kind.freq();
        let potential = if matches!(self.kind, ModeKind::Constant) { 0.0 } else { (p * p / (r * r) + n * n) * value };
        Ok(RadialSample { value, d1, d2: forcing - d1 / r + potential })
    }
}
