//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 7 and 9 contain clauses that the computed fields do not meet (see
//! the README). They are strict expected failures: the run fails if any other
//! criterion fails or if either of these unexpectedly passes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use wedge_core::homogeneous::{decay_study, DecayOptions, Delta1};
use wedge_core::shockstate::{asymptotic_background, converges_in_trend, solve_background, GasParams, WedgeGeometry};
use wedge_core::spectral::{
    radial_00, radial_0n, radial_m0, radial_mn, GridSpec, RadialGrid, RadialMode, SpectralError, WedgeDomain,
};
use wedge_spectral::commands::background::Checks;
use wedge_spectral::commands::bessel::{
    calibrate, summarize_region, uniform_check, wronskian_grid, GridConfig, Region, SampleConfig, UniformConfig,
};
use wedge_spectral::output::read_table;

const EXPECTED_FAILURES: &[u8] = &[7, 9];

const SAMPLE_SEED: u64 = 20_240_601;
const MARGIN_FLOOR: f64 = -1e-9;
const WRONSKIAN_TOL: f64 = 1e-9;
const CROSS_CHECK_TOL: f64 = 1e-12;
const UNIFORM_TOL: f64 = 1e-4;
const BACKGROUND_RESIDUAL: f64 = 1e-12;
const TREND_SLACK: f64 = 0.05;
const MANUFACTURED_TOL: f64 = 1e-6;
const BOUNDARY_TOL: f64 = 1e-7;
const ORACLE_TOL: f64 = 1e-5;
const RATE_TOL: f64 = 0.10;
const UPDATE_TOL: f64 = 1e-8;
const MAX_STEPS: usize = 15;
const CONTRACTION_MAX: f64 = 0.5;
const TOL_EDGE: f64 = 1e-9;
const LINEAR_RATIO: f64 = 2.0;
const LINEAR_SLACK: f64 = 0.10;

const QUARTER_PI: f64 = std::f64::consts::FRAC_PI_4;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(budget: Duration, body: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let mut out = body();
    let elapsed = start.elapsed();
    if elapsed > budget {
        out.pass = false;
        out.detail.push_str(&format!("; over budget {:.0}s", budget.as_secs_f64()));
    }
    (out, elapsed)
}

// ---------------------------------------------------------------- binary runs

struct Runs {
    root: tempfile::TempDir,
}

impl Runs {
    fn new() -> Self {
        Self { root: tempfile::tempdir().expect("temporary directory") }
    }

    /// Run one subcommand on an inline config; returns the output directory.
    fn run(&self, tag: &str, sub: &str, config: Value, threads: u16) -> Result<PathBuf, String> {
        let dir = self.root.path().join(tag);
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        let path = dir.join("config.json");
        std::fs::write(&path, serde_json::to_vec_pretty(&config).unwrap()).map_err(|e| e.to_string())?;
        let out = dir.join("out");
        let status = Command::new(env!("CARGO_BIN_EXE_wedge-spectral"))
            .arg(sub)
            .arg("--config")
            .arg(&path)
            .arg("--out")
            .arg(&out)
            .arg("--threads")
            .arg(threads.to_string())
            .env("WEDGE_SPECTRAL_LOG", "error")
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("{sub} [{tag}] exited with {status}"));
        }
        Ok(out)
    }
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).expect("output exists")).expect("valid JSON")
}

/// Named numeric columns of a CSV written by the tool.
fn columns(path: &Path) -> BTreeMap<String, Vec<f64>> {
    let text = std::fs::read_to_string(path).expect("output exists");
    let (names, rows) = read_table(&text).expect("valid CSV");
    let mut out: BTreeMap<String, Vec<f64>> = names.iter().map(|n| (n.clone(), Vec::new())).collect();
    for row in rows {
        for (name, cell) in names.iter().zip(row) {
            out.get_mut(name).unwrap().push(cell.parse().unwrap_or(f64::NAN));
        }
    }
    out
}

fn csv_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map(|it| it.filter_map(|e| e.ok()?.file_name().into_string().ok()).collect())
        .unwrap_or_default();
    names.retain(|n| n.ends_with(".csv"));
    names.sort();
    names
}

fn identical_csvs(a: &Path, b: &Path) -> Result<usize, String> {
    let names = csv_files(a);
    if names.is_empty() || names != csv_files(b) {
        return Err(format!("CSV sets differ: {:?} vs {:?}", names, csv_files(b)));
    }
    for n in &names {
        if std::fs::read(a.join(n)).ok() != std::fs::read(b.join(n)).ok() {
            return Err(format!("{n} differs"));
        }
    }
    Ok(names.len())
}

// ------------------------------------------------------------------ criteria

fn criterion_1() -> Outcome {
    let cfg = SampleConfig::default();
    let calibration = match calibrate(cfg.m_cap) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("calibration failed: {e}")),
    };
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    let mut samples = 0;
    for region in Region::ALL {
        match summarize_region(region, &cfg, SAMPLE_SEED, &calibration) {
            Ok(s) => {
                worst = worst.min(s.min_margin);
                violations += s.violations;
                samples = s.samples;
            }
            Err(e) => return outcome(false, format!("{}: {e}", region.name())),
        }
    }
    outcome(
        violations == 0 && worst >= MARGIN_FLOOR && samples == 10_000,
        format!(
            "{} regions x {samples} points, violations {violations}, min margin {worst:.3e} (floor {MARGIN_FLOOR:e})",
            Region::ALL.len()
        ),
    )
}

fn criterion_2() -> Outcome {
    let grid = match wronskian_grid(&GridConfig::default()) {
        Ok(g) => g,
        Err(e) => return outcome(false, e.to_string()),
    };
    let worst = grid.iter().map(|p| p.scaled_residual()).fold(0.0, f64::max);
    let worst_quad = grid.iter().filter_map(|p| p.scaled_quadrature_residual()).fold(0.0, f64::max);
    let cross = grid.iter().filter_map(|p| p.cross_check()).fold(0.0, f64::max);
    let uniform = match uniform_check(&UniformConfig::default()) {
        Ok(u) => u,
        Err(e) => return outcome(false, e.to_string()),
    };
    let worst_uniform = uniform.iter().map(|u| u.i_rel_err.max(u.k_rel_err)).fold(0.0, f64::max);
    let pass = worst <= WRONSKIAN_TOL
        && worst_quad <= WRONSKIAN_TOL
        && cross <= CROSS_CHECK_TOL
        && worst_uniform <= UNIFORM_TOL
        && uniform.iter().all(|u| u.nu == 50.0);
    outcome(
        pass,
        format!(
            "{} grid points: max t*|W+1/t| {worst:.2e} (quadrature {worst_quad:.2e}), path agreement {cross:.2e}; \
             uniform nu=50 max rel {worst_uniform:.2e}",
            grid.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    // Four decades in half-decade steps above the attachment threshold.
    let sweep: Vec<f64> = (0..=8).map(|k| 10.0 * 10f64.powf(k as f64 / 2.0)).collect();
    let mut worst_residual: f64 = 0.0;
    let mut failures = Vec::new();
    for gamma in [1.2, 1.4, 2.0] {
        let gas = GasParams::new(gamma, 1.0, 1.0).unwrap();
        for b0 in [0.05, 0.1] {
            let geometry = WedgeGeometry::new(b0).unwrap();
            let mut ratios = Vec::new();
            for &q0 in &sweep {
                match solve_background(&gas, q0, &geometry) {
                    Ok(state) => {
                        worst_residual = worst_residual.max(state.residual);
                        let checks = Checks::evaluate(&gas, &geometry, &state, BACKGROUND_RESIDUAL);
                        if !checks.all() {
                            failures.push(format!("checks at gamma={gamma} b0={b0} q0={q0:.3e}"));
                        }
                        ratios.push(state.s0 / asymptotic_background(&gas, q0, &geometry).s0);
                    }
                    Err(e) => failures.push(format!("gamma={gamma} b0={b0} q0={q0:.3e}: {e}")),
                }
            }
            if !converges_in_trend(&ratios, TREND_SLACK) {
                failures.push(format!("ratio trend at gamma={gamma} b0={b0}: {ratios:?}"));
            }
        }
    }
    outcome(
        failures.is_empty() && worst_residual <= BACKGROUND_RESIDUAL,
        format!(
            "6 (gamma, b0) pairs x {} q0 in [1e1, 1e5]: max residual {worst_residual:.2e}; {}",
            sweep.len(),
            if failures.is_empty() { "entropy, subsonic and ratio trend hold".into() } else { failures.join("; ") }
        ),
    )
}

fn manufactured_config(length: f64) -> Value {
    json!({
        "seed": 0,
        "length": length,
        "truncation": [8, 8],
        "source": { "name": "manufactured", "params": { "mode": 1, "wavenumber": 1 } },
        "verification": [20, 10, 16],
    })
}

/// w = r⁴(L−r)²cos(√μ₁(θ−θ₀))cos y₂ with √μ₁ = π/(π/2 − θ₀).
fn manufactured_exact(length: f64, r: f64, theta: f64, y2: f64) -> f64 {
    let order = std::f64::consts::PI / (std::f64::consts::FRAC_PI_2 - QUARTER_PI);
    r.powi(4) * (length - r).powi(2) * (order * (theta - QUARTER_PI)).cos() * y2.cos()
}

fn criterion_4(runs: &Runs) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for length in [4.0, 8.0] {
        let out = match runs.run(&format!("solve_l{length}_t1"), "solve", manufactured_config(length), 1) {
            Ok(o) => o,
            Err(e) => return outcome(false, e),
        };
        let cols = columns(&out.join("solution.csv"));
        let (r, t, y, v) = (&cols["r"], &cols["theta"], &cols["y2"], &cols["value"]);
        // The exact field vanishes on the edge, so no edge value is subtracted.
        let mut max_err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..v.len() {
            let w = manufactured_exact(length, r[i], t[i], y[i]);
            max_err = max_err.max((v[i] - w).abs());
            scale = scale.max(w.abs());
        }
        let rel = max_err / scale;
        let diag = read_json(&out.join("diagnostics.json"));
        let res = &diag["residuals"];
        let bc = ["neumann_lower", "neumann_upper", "outer"].map(|k| res[k].as_f64().unwrap_or(f64::NAN));
        let bc_max = bc.iter().copied().fold(0.0, f64::max);
        pass &= v.len() == 20 * 10 * 16 && rel <= MANUFACTURED_TOL && bc.iter().all(|&b| b <= BOUNDARY_TOL);
        notes.push(format!("L={length}: rel err {rel:.2e} over {} points, boundary {bc_max:.2e}", v.len()));
    }
    outcome(pass, notes.join("; "))
}

const ORACLE_R0: f64 = 1e-4;
const ORACLE_STEPS: usize = 200_000;

/// RK4 Riccati sweep in s = ln r for R″ + R′/r − (p²/r² + n²)R = F with R
/// bounded at 0 and R′(L) = 0. Forward: R_s = αR + β with α′ = c − α²,
/// β′ = r²F − αβ. Backward: R from R(L) = −β/α.
fn rk4_oracle(p: f64, n: f64, length: f64, forcing: &dyn Fn(f64) -> f64, probes: &[f64]) -> Vec<f64> {
    let (s0, s1) = (ORACLE_R0.ln(), length.ln());
    let h = (s1 - s0) / ORACLE_STEPS as f64;
    let half = h / 2.0;
    let forward = |s: f64, (alpha, beta): (f64, f64)| {
        let r = s.exp();
        (p * p + n * n * r * r - alpha * alpha, r * r * forcing(r) - alpha * beta)
    };
    let f0 = forcing(ORACLE_R0);
    let mut state = (p + n * n * ORACLE_R0 * ORACLE_R0 / (2.0 * (p + 1.0)), f0 * ORACLE_R0 * ORACLE_R0 / (2.0 + p));
    let mut table = Vec::with_capacity(2 * ORACLE_STEPS + 1);
    table.push(state);
    for k in 0..2 * ORACLE_STEPS {
        let s = s0 + k as f64 * half;
        let step = |st: (f64, f64), d: (f64, f64), f: f64| (st.0 + f * d.0, st.1 + f * d.1);
        let k1 = forward(s, state);
        let k2 = forward(s + half / 2.0, step(state, k1, half / 2.0));
        let k3 = forward(s + half / 2.0, step(state, k2, half / 2.0));
        let k4 = forward(s + half, step(state, k3, half));
        state.0 += half / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        state.1 += half / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        table.push(state);
    }
    let slope = |idx: usize, value: f64| table[idx].0 * value + table[idx].1;
    let mut values = vec![0.0; ORACLE_STEPS + 1];
    let mut value = -state.1 / state.0;
    values[ORACLE_STEPS] = value;
    for k in (0..ORACLE_STEPS).rev() {
        let (hi, mid, lo) = (2 * k + 2, 2 * k + 1, 2 * k);
        let k1 = slope(hi, value);
        let k2 = slope(mid, value - half * k1);
        let k3 = slope(mid, value - half * k2);
        let k4 = slope(lo, value - h * k3);
        value -= h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        values[k] = value;
    }
    probes.iter().map(|&r| values[((r.ln() - s0) / h).round() as usize]).collect()
}

fn snap_to_oracle_grid(r: f64, length: f64) -> f64 {
    let s0 = ORACLE_R0.ln();
    let h = (length.ln() - s0) / ORACLE_STEPS as f64;
    (s0 + ((r.ln() - s0) / h).round() * h).exp()
}

fn criterion_5() -> Outcome {
    let length = 4.0;
    let domain = WedgeDomain::new(QUARTER_PI, length).unwrap();
    let forcing = |r: f64| (-r).exp() * r.sqrt() + (r - 2.0).cos();
    let pairs = [(1usize, 0usize), (2, 0), (0, 1), (0, 3), (1, 1), (1, 3), (2, 1), (2, 3)];
    let mut worst: f64 = 0.0;
    let mut orders = Vec::new();
    for (m, n) in pairs {
        let p = domain.angular_order(m);
        orders.push(p);
        let run = || -> Result<f64, SpectralError> {
            let grid = RadialGrid::new(length, p, n.max(1), &GridSpec::default())?;
            let f: Vec<f64> = grid.nodes().iter().map(|&r| forcing(r)).collect();
            let mode: RadialMode = match (m, n) {
                (_, 0) => radial_m0(&grid, &f, m, &domain)?,
                (0, _) => radial_0n(&grid, &f, n)?,
                _ => radial_mn(&grid, &f, m, n, &domain)?,
            };
            let probes: Vec<f64> =
                [0.25, 0.5, 1.0, 2.0, 0.9 * length].iter().map(|&r| snap_to_oracle_grid(r, length)).collect();
            let oracle = rk4_oracle(p, n as f64, length, &forcing, &probes);
            let scale = oracle.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let mut err: f64 = 0.0;
            for (&r, &expected) in probes.iter().zip(&oracle) {
                err = err.max((mode.eval(&grid, r)?.value - expected).abs() / scale);
            }
            Ok(err)
        };
        match run() {
            Ok(e) => worst = worst.max(e),
            Err(e) => return outcome(false, format!("(m, n) = ({m}, {n}): {e}")),
        }
    }
    let has_orders = [4.0, 8.0].iter().all(|&o| orders.iter().any(|&p| (p - o).abs() < 1e-12));
    let has_waves = [1, 3].iter().all(|&k| pairs.iter().any(|&(_, n)| n == k));
    outcome(
        worst <= ORACLE_TOL && has_orders && has_waves && pairs.len() >= 5,
        format!("{} (m, n) pairs with sqrt(mu) in {{4, 8}}, n in {{1, 3}}: max rel deviation {worst:.2e}", pairs.len()),
    )
}

fn criterion_6() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for length in [4.0, 8.0] {
        let grid = RadialGrid::new(length, 4.0, 1, &GridSpec::default()).unwrap();
        let nodes = grid.nodes();
        // (profile, exact c_L, sup|f|)
        let cases: [(Vec<f64>, f64, f64); 2] = [
            (vec![1.0; nodes.len()], length / 2.0, 1.0),
            (nodes.to_vec(), length * length / 3.0, length),
        ];
        for (profile, c_l, sup) in cases {
            let exact = radial_00(&grid, &profile, c_l, 0.0).is_ok();
            let bumped = |shift: f64| {
                matches!(radial_00(&grid, &profile, c_l + shift, 0.0), Err(SpectralError::CompatibilityViolation { .. }))
            };
            let rejected = bumped(0.01 * sup) && bumped(-0.01 * sup);
            pass &= exact && rejected;
            notes.push(format!("L={length} c_L={c_l}: exact {}, +-1% {}", ok(exact), if rejected { "rejected" } else { "ACCEPTED" }));
        }
    }
    outcome(pass, notes.join("; "))
}

fn ok(b: bool) -> &'static str {
    if b {
        "passes"
    } else {
        "FAILS"
    }
}

fn criterion_7() -> Outcome {
    let delta1 = Delta1::new(0.5, None).unwrap();
    let d1 = delta1.value();
    let options = DecayOptions::new(QUARTER_PI, delta1);
    let order = std::f64::consts::PI / (std::f64::consts::FRAC_PI_2 - QUARTER_PI);
    let angular = move |l: f64, t: f64, _: f64| l.powf(d1 - 1.0) * (order * (t - QUARTER_PI)).cos();
    let periodic = move |l: f64, _: f64, y: f64| l.powf(d1 - 1.0) * y.sin();
    let (cos_family, sin_family) = match (decay_study(&angular, &options), decay_study(&periodic, &options)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e.to_string()),
    };
    let negative = |r: Option<f64>| r.is_some_and(|v| v < 0.0);
    let cos_decays = cos_family.decays && negative(cos_family.fitted_rate);
    let sin_decays = sin_family.decays && negative(sin_family.fitted_rate);
    let expected = d1 - order;
    let measured = cos_family.edge_rate.unwrap_or(f64::NAN);
    let rate_error = ((measured - expected) / expected).abs();
    let rate_ok = rate_error <= RATE_TOL;
    let norms: Vec<String> = cos_family.rows.iter().map(|r| format!("{:.4e}", r.weighted_norm)).collect();
    outcome(
        cos_decays && sin_decays && rate_ok,
        format!(
            "(m,0) family norm {} over L = 4..32 (rate {:.3e}, decreases: {}); sin(y2) family rate {:.3}, decreases: {}; \
             (m,0) edge rate {measured:.6} vs {expected:.6} (rel {rate_error:.1e})",
            norms.join(", "),
            cos_family.fitted_rate.unwrap_or(f64::NAN),
            cos_decays,
            sin_family.fitted_rate.unwrap_or(f64::NAN),
            sin_decays,
        ),
    )
}

fn nonlinear_config(epsilon: f64, psi: Value) -> Value {
    json!({
        "seed": 0,
        "gas": { "gamma": 1.4 },
        "q0": 20.0,
        "b0": 0.1,
        "epsilon": epsilon,
        "psi": psi,
        "truncation": [12, 12],
        "L_cut": 32.0,
    })
}

fn wave() -> Value {
    json!({ "name": "wave", "params": { "support": 2.0, "taper": 4.0, "wavenumber": 1, "phase": 0.0 } })
}

fn planar() -> Value {
    json!({ "name": "planar", "params": { "support": 2.0, "taper": 4.0 } })
}

fn criterion_8(out: &Result<PathBuf, String>) -> Outcome {
    let out = match out {
        Ok(o) => o,
        Err(e) => return outcome(false, e.clone()),
    };
    let summary = read_json(&out.join("nonlinear.json"));
    let u0 = summary["u0_norm"].as_f64().unwrap_or(f64::NAN);
    let cols = columns(&out.join("iteration.csv"));
    let steps = cols["step"].len();
    let last = cols["update_norm"].last().copied().unwrap_or(f64::NAN);
    let contractions: Vec<f64> =
        cols["step"].iter().zip(&cols["contraction"]).filter(|(&s, _)| s >= 2.0).map(|(_, &c)| c).collect();
    let contracting = contractions.iter().all(|&c| c < CONTRACTION_MAX);
    outcome(
        steps <= MAX_STEPS && last <= UPDATE_TOL * u0 && contracting,
        format!(
            "{steps} steps, final update {last:.3e} vs {:.3e} (1e-8 |u0|), contractions {:?}",
            UPDATE_TOL * u0,
            contractions.iter().map(|c| format!("{c:.2e}")).collect::<Vec<_>>()
        ),
    )
}

fn max_edge(out: &Path) -> f64 {
    columns(&out.join("edge_profile.csv"))["u_edge"].iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn criterion_9(base: &Result<PathBuf, String>, half: &Result<PathBuf, String>, flat: &Result<PathBuf, String>) -> Outcome {
    let (base, half, flat) = match (base, half, flat) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return outcome(false, e.clone()),
    };
    let (edge, edge_half, edge_flat) = (max_edge(base), max_edge(half), max_edge(flat));
    let ratio = edge / edge_half;
    let magnitude = edge > 1e3 * TOL_EDGE;
    let linear = (ratio - LINEAR_RATIO).abs() <= LINEAR_SLACK * LINEAR_RATIO;
    let planar_small = edge_flat <= 10.0 * TOL_EDGE;
    outcome(
        magnitude && linear && planar_small,
        format!(
            "max|u(0,y2,0)| {edge:.3e} vs {:.0e} (exceeds: {magnitude}); eps ratio {ratio:.4} (within 10% of 2: {linear}); \
             planar {edge_flat:.3e} vs {:.0e} (below: {planar_small})",
            1e3 * TOL_EDGE,
            10.0 * TOL_EDGE
        ),
    )
}

fn criterion_10(runs: &Runs, nonlinear: (&Result<PathBuf, String>, &Result<PathBuf, String>)) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for length in [4.0, 8.0] {
        let one = runs.run(&format!("solve_l{length}_t1"), "solve", manufactured_config(length), 1);
        let four = runs.run(&format!("solve_l{length}_t4"), "solve", manufactured_config(length), 4);
        let result = match (one, four) {
            (Ok(a), Ok(b)) => identical_csvs(&a, &b),
            (Err(e), _) | (_, Err(e)) => Err(e),
        };
        pass &= result.is_ok();
        notes.push(match result {
            Ok(n) => format!("solve L={length}: {n} CSVs identical"),
            Err(e) => format!("solve L={length}: {e}"),
        });
    }
    let result = match nonlinear {
        (Ok(a), Ok(b)) => identical_csvs(a, b),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    pass &= result.is_ok();
    notes.push(match result {
        Ok(n) => format!("nonlinear: {n} CSVs identical"),
        Err(e) => format!("nonlinear: {e}"),
    });
    outcome(pass, notes.join("; "))
}

// ---------------------------------------------------------------------- main

fn report(number: u8, (out, elapsed): (Outcome, Duration), unexpected: &mut Vec<u8>) {
    let expected_failure = EXPECTED_FAILURES.contains(&number);
    let verdict = if out.pass { "PASS" } else { "FAIL" };
    let note = match (out.pass, expected_failure) {
        (false, true) => " (expected failure)",
        (true, true) => " (UNEXPECTED PASS)",
        (false, false) => " (UNEXPECTED FAILURE)",
        (true, false) => "",
    };
    if out.pass == expected_failure {
        unexpected.push(number);
    }
    println!("criterion {number:>2} {verdict}{note} [{:.1}s] {}", elapsed.as_secs_f64(), out.detail);
}

fn main() {
    // `cargo test` forwards harness flags such as `--list`; only a plain run executes.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let runs = Runs::new();
    let mut unexpected = Vec::new();
    let secs = Duration::from_secs;

    report(1, timed(secs(10), criterion_1), &mut unexpected);
    report(2, timed(secs(30), criterion_2), &mut unexpected);
    report(3, timed(secs(5), criterion_3), &mut unexpected);
    report(4, timed(secs(60), || criterion_4(&runs)), &mut unexpected);
    report(5, timed(secs(20), criterion_5), &mut unexpected);
    report(6, timed(secs(5), criterion_6), &mut unexpected);
    report(7, timed(secs(60), criterion_7), &mut unexpected);

    let start = Instant::now();
    let base = runs.run("nonlinear_t1", "nonlinear", nonlinear_config(1e-3, wave()), 1);
    let base_time = start.elapsed();
    report(8, (criterion_8(&base), base_time), &mut unexpected);
    if base_time > secs(15 * 60) {
        println!("criterion  8 runtime {base_time:?} exceeds 15 min");
        unexpected.push(8);
    }

    // The criterion 8 run is shared, so its time counts toward this budget too.
    let (out, elapsed) = timed(secs(30 * 60) - base_time.min(secs(30 * 60)), || {
        let half = runs.run("nonlinear_half", "nonlinear", nonlinear_config(5e-4, wave()), 1);
        let flat = runs.run("nonlinear_planar", "nonlinear", nonlinear_config(1e-3, planar()), 1);
        criterion_9(&base, &half, &flat)
    });
    report(9, (out, elapsed + base_time), &mut unexpected);

    let start = Instant::now();
    let four = runs.run("nonlinear_t4", "nonlinear", nonlinear_config(1e-3, wave()), 4);
    let four_time = start.elapsed();
    let (out, elapsed) = timed(secs(120), || criterion_10(&runs, (&base, &four)));
    report(10, (out, elapsed + four_time), &mut unexpected);

    if unexpected.is_empty() {
        println!("acceptance: outcomes as expected (expected failures: {EXPECTED_FAILURES:?})");
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
