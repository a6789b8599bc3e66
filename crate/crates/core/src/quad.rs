//! Quadrature building blocks: Gauss–Legendre rules, adaptive Gauss–Kronrod,
//! and Lagrange weights used for partial integrals inside a panel.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = math::cos(math::PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if math::abs(dx) < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node/weight pairs mapped onto `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on_interval(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Absolute and relative targets for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = math::abs(res_k);
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (math::abs(f1) + math::abs(f2));
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * math::abs(fc - mean);
    for j in 0..7 {
        res_asc += WGK[j] * (math::abs(fv1[j] - mean) + math::abs(fv2[j] - mean));
    }
    let value = res_k * half;
    res_asc *= math::abs(half);
    res_abs *= math::abs(half);
    let mut error = math::abs((res_k - res_g) * half);
    if res_asc != 0.0 && error != 0.0 {
        let scale = math::pow(200.0 * error / res_asc, 1.5);
        error = res_asc * scale.min(1.0);
    }
    let round_floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(round_floor);
    }
    Panel { a, b, value, error }
}

/// Globally adaptive 7/15-point Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate meets `tol` or `max_panels` is reached. Deterministic for a
/// deterministic integrand.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance, max_panels: usize) -> Integral {
    let mut panels = vec![kronrod15(&mut f, a, b)];
    let mut evaluations = 15;
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = tol.abs.max(tol.rel * math::abs(value));
        if error <= target {
            return Integral { value, error, evaluations, converged: true };
        }
        if panels.len() >= max_panels {
            return Integral { value, error, evaluations, converged: false };
        }
        let worst = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc })
            .0;
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel no longer splittable in floating point.
            let value: f64 = panels.iter().map(|q| q.value).sum::<f64>() + p.value;
            let error: f64 = panels.iter().map(|q| q.error).sum::<f64>() + p.error;
            return Integral { value, error, evaluations, converged: false };
        }
        panels.push(kronrod15(&mut f, p.a, mid));
        panels.push(kronrod15(&mut f, mid, p.b));
        evaluations += 30;
    }
}

/// Barycentric weights for Lagrange interpolation through `nodes`.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    nodes
        .iter()
        .enumerate()
        .map(|(j, xj)| {
            let prod: f64 = nodes
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, xk)| xj - xk)
                .product();
            1.0 / prod
        })
        .collect()
}

/// Values of every Lagrange basis polynomial at `x`.
pub fn lagrange_basis(nodes: &[f64], bary: &[f64], x: f64) -> Vec<f64> {
    if let Some(j) = nodes.iter().position(|&xj| xj == x) {
        let mut out = vec![0.0; nodes.len()];
        out[j] = 1.0;
        return out;
    }
    let terms: Vec<f64> = nodes.iter().zip(bary).map(|(xj, wj)| wj / (x - xj)).collect();
    let denom: f64 = terms.iter().sum();
    terms.iter().map(|t| t / denom).collect()
}

/// First and second derivative of every Lagrange basis polynomial at `x`.
pub fn lagrange_basis_derivatives(nodes: &[f64], x: f64) -> (Vec<f64>, Vec<f64>) {
    let n = nodes.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for j in 0..n {
        let denom: f64 = (0..n).filter(|&k| k != j).map(|k| nodes[j] - nodes[k]).product();
        // Sum over ordered pairs of omitted factors of the remaining product.
        let mut first = 0.0;
        let mut second = 0.0;
        for a in 0..n {
            if a == j {
                continue;
            }
            let mut pa = 1.0;
            for k in 0..n {
                if k != j && k != a {
                    pa *= x - nodes[k];
                }
            }
            first += pa;
            for b in 0..n {
                if b == j || b == a {
                    continue;
                }
                let mut pab = 1.0;
                for k in 0..n {
                    if k != j && k != a && k != b {
                        pab *= x - nodes[k];
                    }
                }
                second += pab;
            }
        }
        d1[j] = first / denom;
        d2[j] = second / denom;
    }
    (d1, d2)
}

/// `∫_{x0}^{x} ℓ_k(s) ds` for every basis polynomial of `nodes`.
pub fn lagrange_partial_integrals(nodes: &[f64], bary: &[f64], rule: &GaussRule, x0: f64, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nodes.len()];
    if x == x0 {
        return out;
    }
    for (s, w) in rule.on_interval(x0, x) {
        let basis = lagrange_basis(nodes, bary, s);
        for (o, b) in out.iter_mut().zip(&basis) {
            *o += w * b;
        }
    }
    out
}
