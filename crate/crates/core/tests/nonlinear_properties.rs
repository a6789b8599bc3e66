use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wedge_core::nonlinear::*;
use wedge_core::norms::{to_cartesian, CartesianJet};
use wedge_core::shockstate::{solve_background, GasParams, WedgeGeometry};
use wedge_core::spectral::Truncation;

fn gas() -> GasParams {
    GasParams::new(1.4, 1.0, 1.0).unwrap()
}

fn wave(phase: f64) -> Perturbation {
    Perturbation::Wave { support: 2.0, taper: 4.0, wavenumber: 1, phase }
}

fn planar() -> Perturbation {
    Perturbation::Planar { support: 2.0, taper: 4.0 }
}

fn problem(epsilon: f64, psi: Perturbation) -> Problem {
    Problem::new(gas(), 0.1, IncomingFlow::new(20.0, epsilon, psi).unwrap()).unwrap()
}

/// Small grid so a full iteration takes a few seconds.
fn small_settings() -> IterationSettings {
    IterationSettings {
        truncation: Truncation::new(6, 6).unwrap(),
        cut_radius: 8.0,
        edge_samples: 32,
        trust_points: 60,
        trust_pairs: 60,
        ..IterationSettings::default()
    }
}

fn run(p: &Problem, settings: IterationSettings) -> (Workspace, IterationState) {
    let ws = Workspace::new(p, settings).unwrap();
    let state = run_iteration(p, &ws).unwrap();
    (ws, state)
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// ∇ₓΦ = q₀·(first row of (∂x/∂y)⁻¹), by Cramer's rule on the map's Jacobian.
fn jump_gradient_oracle(q0: f64, b0: f64, g: [f64; 3]) -> [f64; 3] {
    let jac = [[g[0], g[1], g[2]], [0.0, 1.0, 0.0], [b0 * (g[0] - 1.0), b0 * g[1], 1.0 + b0 * g[2]]];
    let det = det3(jac);
    // Row 1 of the inverse: cofactors of column 1.
    let cof = |r: usize, c: usize| {
        let rows: Vec<usize> = (0..3).filter(|&i| i != r).collect();
        let cols: Vec<usize> = (0..3).filter(|&j| j != c).collect();
        let minor = jac[rows[0]][cols[0]] * jac[rows[1]][cols[1]] - jac[rows[0]][cols[1]] * jac[rows[1]][cols[0]];
        if (r + c) % 2 == 0 { minor } else { -minor }
    };
    [q0 * cof(0, 0) / det, q0 * cof(1, 0) / det, q0 * cof(2, 0) / det]
}

fn random_gradient(rng: &mut ChaCha8Rng) -> [f64; 3] {
    [1.0 + rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)]
}

#[test]
fn density_examples() {
    let g = GasParams::new(2.0, 1.0, 1.0).unwrap();
    let c0 = g.bernoulli_constant(3.0);
    assert_eq!(density_from_gradient(&g, c0, [3.0, 0.0, 0.0]).unwrap(), 1.0);
    assert!((density_from_gradient(&g, c0, [0.0; 3]).unwrap() - 3.25).abs() < 1e-15);
}

#[test]
fn background_profile_identity_case_and_round_trip() {
    let geometry = WedgeGeometry::new(0.1).unwrap();
    let mut state = solve_background(&gas(), 20.0, &geometry).unwrap();
    let exact = background_u0(&state, 20.0, 0.1).unwrap();
    state.u1_plus = 0.0;
    state.u3_plus = 0.0;
    let identity = background_u0(&state, 20.0, 0.1).unwrap();
    assert_eq!((identity.slope_y1, identity.slope_y3), (1.0, 0.0));

    let map = HodographMap { q0: 20.0, b0: 0.1 };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let y = [rng.gen_range(0.0..10.0), rng.gen_range(0.0..6.3), rng.gen_range(0.0..10.0)];
        let x = map.inverse(y, exact.value(y));
        let back = map.forward(x, exact.potential_jump(x));
        for i in 0..3 {
            assert!((back[i] - y[i]).abs() < 1e-12 * (1.0 + y[i].abs()), "{y:?} -> {back:?}");
        }
    }
}

#[test]
fn degenerate_background_map_is_rejected() {
    let geometry = WedgeGeometry::new(0.1).unwrap();
    let mut state = solve_background(&gas(), 20.0, &geometry).unwrap();
    state.u3_plus = 0.0;
    state.u1_plus = 20.0;
    assert!(matches!(background_u0(&state, 20.0, 0.1), Err(NonlinearError::DegenerateMap(_))));
}

#[test]
fn y3_slope_shrinks_like_the_density_ratio() {
    let geometry = WedgeGeometry::new(0.1).unwrap();
    let scaled: Vec<f64> = [10.0, 20.0, 40.0, 80.0, 160.0]
        .iter()
        .map(|&q0: &f64| {
            let state = solve_background(&gas(), q0, &geometry).unwrap();
            let profile = background_u0(&state, q0, 0.1).unwrap();
            profile.slope_y3.abs() * q0.powf(2.0 / 0.4)
        })
        .collect();
    let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi / lo < 1.5, "{scaled:?}");
}

#[test]
fn ramp_operator_matches_the_slip_condition() {
    // G₁ = (D/q₀)(b₀∂₁φ⁺ − ∂₃φ⁺) for any ∇φ⁻ and ∇u.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (q0, b0) = (rng.gen_range(5.0..40.0), rng.gen_range(0.0..0.3));
        let g = random_gradient(&mut rng);
        let p = [q0 + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let jump = jump_gradient_oracle(q0, b0, g);
        let plus = [p[0] - jump[0], p[1] - jump[1], p[2] - jump[2]];
        let d = g[0] + b0 * g[2];
        let oracle = d / q0 * (b0 * plus[0] - plus[2]);
        let printed = ramp_expression(q0, b0, p, g);
        assert!((printed - oracle).abs() < 1e-12 * (1.0 + oracle.abs()), "{printed} vs {oracle}");
    }
}

#[test]
fn ramp_operator_without_ramp_slope() {
    let (q0, g, p) = (20.0, [1.1, 0.3, -0.2], [19.0, 0.4, 0.7]);
    assert_eq!(ramp_expression(q0, 0.0, p, g), -g[2] - p[2] / q0 * g[0]);
}

#[test]
fn shock_operator_matches_the_mass_flux_jump() {
    // G₂ = (D/q₀)²[(1 − ρ₋/ρ₊)∇φ⁻·∇Φ − |∇Φ|²].
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let (q0, b0) = (rng.gen_range(5.0..40.0), rng.gen_range(0.0..0.3));
        let g = random_gradient(&mut rng);
        let p = [q0 + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let ratio = rng.gen_range(0.0..1.0);
        let jump = jump_gradient_oracle(q0, b0, g);
        let d = g[0] + b0 * g[2];
        let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let oracle = (d / q0).powi(2) * ((1.0 - ratio) * dot(p, jump) - dot(jump, jump));
        let printed = shock_expression(q0, b0, p, g, ratio);
        assert!((printed - oracle).abs() < 1e-12 * (1.0 + oracle.abs()), "{printed} vs {oracle}");
    }
}

#[test]
fn shock_operator_constant_term() {
    assert_eq!(shock_expression(20.0, 0.1, [20.0, 0.3, -0.1], [0.0; 3], 0.3), -1.0);
}

#[test]
fn background_satisfies_all_three_operators() {
    let p = problem(0.0, wave(0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let theta0 = p.geometry.theta0;
    for _ in 0..200 {
        let (r, y2) = (rng.gen_range(0.0..30.0), rng.gen_range(0.0..6.3));
        let ramp = to_cartesian(r, theta0, y2);
        assert!(p.boundary_g1(ramp, &p.background.jet(ramp)).abs() <= 1e-12);
        let shock = to_cartesian(r, std::f64::consts::FRAC_PI_2, y2);
        assert!(p.boundary_g2(shock, &p.background.jet(shock)).unwrap().abs() <= 1e-10);
        let inner = to_cartesian(r, rng.gen_range(theta0..1.57), y2);
        assert!(p.interior_operator(inner, &p.background.jet(inner)).unwrap().residual.abs() <= 1e-11);
    }
}

#[test]
fn transformed_block_agrees_with_listing_except_one_term() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let b0 = rng.gen_range(0.0..0.4);
        let g = random_gradient(&mut rng);
        let v = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let a = physical_coefficients(v, rng.gen_range(1.0..4.0));
        let derived = transformed_coefficients(&a, b0, g);
        let printed = printed_coefficients(&a, b0, g);
        for (i, j) in [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2)] {
            assert!((derived[i][j] - printed[i][j]).abs() < 1e-13 * (1.0 + derived[i][j].abs()), "({i},{j})");
        }
        let d = g[0] + b0 * g[2];
        let gap = -2.0 * a[1][2] * g[1] * b0 * g[2] / d.powi(3);
        assert!((printed[0][2] - derived[0][2] - gap).abs() < 1e-13 * (1.0 + derived[0][2].abs()));
    }
}

/// u = u₀ + a quadratic, with Φ recovered pointwise by Newton inversion.
struct QuadraticIterate {
    base: [f64; 3],
    hessian: [[f64; 3]; 3],
    centre: [f64; 3],
}

impl QuadraticIterate {
    fn jet(&self, y: [f64; 3]) -> CartesianJet {
        let d = [y[0] - self.centre[0], y[1] - self.centre[1], y[2] - self.centre[2]];
        let mut value = self.base[0] * y[0] + self.base[2] * y[2];
        let mut gradient = self.base;
        for i in 0..3 {
            for j in 0..3 {
                value += 0.5 * self.hessian[i][j] * d[i] * d[j];
                gradient[i] += self.hessian[i][j] * d[j];
            }
        }
        CartesianJet { value, gradient, hessian: self.hessian }
    }

    /// Φ(x) = q₀y₁ where y solves x = inverse(y, u(y)).
    fn jump(&self, map: &HodographMap, x: [f64; 3], guess: [f64; 3]) -> f64 {
        let mut y = guess;
        for _ in 0..50 {
            let j = self.jet(y);
            let fx = map.inverse(y, j.value);
            let res = [fx[0] - x[0], fx[1] - x[1], fx[2] - x[2]];
            let g = j.gradient;
            let b0 = map.b0;
            let jac = [[g[0], g[1], g[2]], [0.0, 1.0, 0.0], [b0 * (g[0] - 1.0), b0 * g[1], 1.0 + b0 * g[2]]];
            let det = det3(jac);
            let mut step = [0.0; 3];
            for (k, s) in step.iter_mut().enumerate() {
                let mut m = jac;
                for row in 0..3 {
                    m[row][k] = res[row];
                }
                *s = det3(m) / det;
            }
            for k in 0..3 {
                y[k] -= step[k];
            }
            if step.iter().all(|s| s.abs() < 1e-15) {
                break;
            }
        }
        map.q0 * y[0]
    }
}

#[test]
fn interior_operator_is_the_downstream_potential_equation() {
    // N(u) = (1/q₀)Σ a_kl ∂_kl φ⁺ with ∂²Φ from finite differences of the inverted map.
    let p = problem(1e-2, wave(0.3));
    let bg = p.background.gradient();
    let it = QuadraticIterate {
        base: bg,
        hessian: [[0.02, 0.01, -0.015], [0.01, -0.03, 0.005], [-0.015, 0.005, 0.01]],
        centre: [0.5, 1.0, 0.8],
    };
    for y in [[0.6, 1.1, 0.9], [0.3, 2.0, 1.2], [1.5, 4.0, 0.5]] {
        let jet = it.jet(y);
        let x = p.map.inverse(y, jet.value);
        let h = 1e-3;
        let phi = |dx: [f64; 3]| {
            let xx = [x[0] + dx[0], x[1] + dx[1], x[2] + dx[2]];
            p.flow.jet(xx).value - it.jump(&p.map, xx, y)
        };
        let mut hess = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let shift = |si: f64, sj: f64| {
                    let mut d = [0.0; 3];
                    d[i] += si * h;
                    d[j] += sj * h;
                    phi(d)
                };
                hess[i][j] = (shift(1.0, 1.0) - shift(1.0, -1.0) - shift(-1.0, 1.0) + shift(-1.0, -1.0)) / (4.0 * h * h);
            }
        }
        let sample = p.interior_operator(y, &jet).unwrap();
        let mut oracle = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                oracle += sample.coefficients.a[i][j] * hess[i][j] / p.q0();
            }
        }
        let scale = sample.residual.abs().max(1e-3);
        assert!((sample.residual - oracle).abs() < 1e-4 * scale, "{} vs {oracle}", sample.residual);
    }
}

#[test]
fn defects_at_the_background_are_linear_in_epsilon() {
    let sup = |eps: f64| {
        let p = problem(eps, wave(0.0));
        let (mut g1, mut n) = (0.0f64, 0.0f64);
        for i in 0..60 {
            for j in 0..12 {
                let (r, y2) = (0.1 * i as f64, 6.28 * j as f64 / 12.0);
                let ramp = to_cartesian(r, p.geometry.theta0, y2);
                g1 = g1.max(p.boundary_g1(ramp, &p.background.jet(ramp)).abs());
                let inner = to_cartesian(r, 0.8, y2);
                n = n.max(p.interior_operator(inner, &p.background.jet(inner)).unwrap().residual.abs());
            }
        }
        (g1 / eps, n / eps)
    };
    let (g_small, n_small) = sup(1e-4);
    let (g_mid, n_mid) = sup(1e-3);
    let (_, n_big) = sup(1e-2);
    assert!((g_small / g_mid - 1.0).abs() < 0.02, "{g_small} {g_mid}");
    assert!(n_small > 0.0 && (n_small / n_mid - 1.0).abs() < 0.05 && (n_big / n_mid - 1.0).abs() < 0.2);
}

#[test]
fn entropy_and_supersonic_violations_are_reported() {
    let p = problem(0.0, wave(0.0));
    let y = [0.0, 0.5, 1.0];
    let fast = CartesianJet { value: 0.0, gradient: [1000.0, 0.0, -11.0], hessian: [[0.0; 3]; 3] };
    assert!(matches!(p.boundary_g2(y, &fast), Err(NonlinearError::EntropyViolation { .. })));
    let folded = CartesianJet { value: 0.0, gradient: [-1.0, 0.0, 0.0], hessian: [[0.0; 3]; 3] };
    assert!(matches!(p.boundary_g2(y, &folded), Err(NonlinearError::DegenerateMap(_))));
    let strong = problem(200.0, wave(0.0));
    assert!(matches!(
        strong.flow.supersonic_margin(&strong.gas, strong.upstream.bernoulli_c0, 16.0),
        Err(NonlinearError::NotSupersonic { .. }) | Err(NonlinearError::Vacuum(_))
    ));
}

#[test]
fn perturbation_is_periodic_and_supported() {
    let psi = wave(0.4);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let x = [rng.gen_range(-5.0..5.0), rng.gen_range(-7.0..7.0), rng.gen_range(-1.0..3.0)];
        let shifted = psi.jet([x[0], x[1] + std::f64::consts::TAU, x[2]]);
        assert!((psi.jet(x).value - shifted.value).abs() < 1e-14);
        if x[2] <= 0.0 || x[2] >= 2.0 {
            assert_eq!(psi.jet(x), PotentialJet::default());
        }
    }
}

#[test]
fn unperturbed_flow_is_a_fixed_point() {
    let p = problem(0.0, wave(0.0));
    let (ws, state) = run(&p, small_settings());
    assert_eq!(state.steps(), 1);
    assert!(state.history[0].update_norm <= 1e-12 * ws.u0_norm, "{:?}", state.history);
    assert!(state.max_edge() <= 1e-12);
    let surface = shock_surface(&p, &ws, &state.iterate, 8, 9).unwrap();
    let s0 = p.background.state.s0;
    assert!((surface.fitted_slope - s0).abs() <= 1e-8 * s0, "{} vs {s0}", surface.fitted_slope);
}

#[test]
fn generic_perturbation_iteration_properties() {
    let p = problem(1e-3, wave(0.0));
    let (ws, state) = run(&p, small_settings());
    assert!(state.steps() <= 15);
    assert!(state.history.iter().all(|h| h.residuals.ellipticity_margin > 0.0));
    assert!(state.consistency_change <= 2.0 * state.tolerance, "{}", state.consistency_change);
    assert_eq!(state.iterate.edge_value(&ws, 0.0).unwrap(), 0.0);

    // Even ψ gives an even edge profile.
    // Machine level relative to the size of the correction itself.
    let scale = state.history[0].update_norm;
    let n = state.edge_profile.len();
    for k in 1..n {
        let (a, b) = (state.edge_profile[k].1, state.edge_profile[n - k].1);
        assert!((a - b).abs() <= 1e-10 * scale, "{k}: {a} vs {b}");
    }

    // The shock trace at y₃ = 0 is the edge profile pushed through the inverse map.
    let surface = shock_surface(&p, &ws, &state.iterate, 16, 5).unwrap();
    assert_eq!(surface.attachment[0].1, 0.0);
    for (y2, x1, x3) in &surface.attachment {
        let edge = state.iterate.edge_value(&ws, *y2).unwrap();
        assert!((x1 - edge).abs() <= 1e-10 && (x3 - p.b0() * edge).abs() <= 1e-10);
    }
}

#[test]
fn moving_the_pin_shifts_the_edge_by_a_constant() {
    let p = problem(1e-3, wave(0.0));
    let (ws, base) = run(&p, small_settings());
    let (_, moved) = run(&p, IterationSettings { pin_y2: 1.0, ..small_settings() });
    let diffs: Vec<f64> = base.edge_profile.iter().zip(&moved.edge_profile).map(|(a, b)| b.1 - a.1).collect();
    let spread = diffs.iter().fold(f64::NEG_INFINITY, |m, &d| m.max(d)) - diffs.iter().fold(f64::INFINITY, |m, &d| m.min(d));
    assert!(diffs[0].abs() > 0.0);
    assert!(spread <= 1e-12 * ws.u0_norm && spread <= 1e-3 * base.max_edge(), "{spread}");
}

#[test]
fn planar_perturbation_keeps_the_edge_pinned() {
    let p = problem(1e-3, planar());
    let (_, state) = run(&p, small_settings());
    assert!(state.max_edge() <= 1e-8, "{}", state.max_edge());
}

#[test]
fn response_is_linear_in_epsilon() {
    let measure = |eps: f64| {
        let p = problem(eps, wave(0.0));
        let (ws, state) = run(&p, small_settings());
        (update_norm(&ws, &state.iterate, &Iterate::background()).unwrap() / eps, state.max_edge() / eps)
    };
    let (u_small, e_small) = measure(1e-4);
    let (u_big, e_big) = measure(1e-3);
    assert!((u_small / u_big - 1.0).abs() < 0.1, "{u_small} {u_big}");
    assert!((e_small / e_big - 1.0).abs() < 0.1, "{e_small} {e_big}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bernoulli_round_trip(gx in -1.5f64..1.5, gy in -1.5f64..1.5, gz in -1.5f64..1.5, gamma in 1.1f64..2.5) {
        let gas = GasParams::new(gamma, 1.0, 1.0).unwrap();
        let c0 = gas.bernoulli_constant(1.0);
        let g = [gx, gy, gz];
        let half = 0.5 * (gx * gx + gy * gy + gz * gz);
        prop_assume!(half < 0.9 * c0);
        let rho = density_from_gradient(&gas, c0, g).unwrap();
        prop_assert!(rho > 0.0);
        prop_assert!((gas.enthalpy(rho).unwrap() + half - c0).abs() <= 1e-12 * c0);
    }

    #[test]
    fn jump_gradient_matches_cramer(u1 in 0.5f64..2.0, u2 in -1.0f64..1.0, u3 in -1.0f64..1.0, b0 in 0.0f64..0.5) {
        prop_assume!(u1 + b0 * u3 > 0.1);
        let mine = jump_gradient(20.0, b0, [u1, u2, u3]).unwrap();
        let oracle = jump_gradient_oracle(20.0, b0, [u1, u2, u3]);
        for i in 0..3 {
            prop_assert!((mine[i] - oracle[i]).abs() <= 1e-12 * (1.0 + oracle[i].abs()));
        }
    }

    #[test]
    fn min_eigenvalue_bounds_the_quadratic_form(d in proptest::array::uniform3(0.1f64..3.0), o in proptest::array::uniform3(-0.5f64..0.5), v in proptest::array::uniform3(-1.0f64..1.0)) {
        let m = [[d[0], o[0], o[1]], [o[0], d[1], o[2]], [o[1], o[2], d[2]]];
        let lambda = min_eigenvalue(&m);
        let norm2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        prop_assume!(norm2 > 1e-6);
        let mut form = 0.0;
        for i in 0..3 { for j in 0..3 { form += v[i] * m[i][j] * v[j]; } }
        prop_assert!(form >= lambda * norm2 - 1e-12);
        // det(M − λI) = 0.
        let shifted = [[d[0] - lambda, o[0], o[1]], [o[0], d[1] - lambda, o[2]], [o[1], o[2], d[2] - lambda]];
        prop_assert!(det3(shifted).abs() < 1e-9);
    }
}

#[test]
fn doubling_the_cut_radius_barely_moves_the_edge() {
    let p = problem(1e-3, wave(0.0));
    let settings = IterationSettings { cut_radius: 16.0, ..small_settings() };
    let (ws, state) = run(&p, settings);
    let report = far_field_study(&p, &ws, &state).unwrap();
    assert_eq!(report.doubled_radius, 32.0);
    assert!(report.relative_change <= 0.01, "{report:?}");
}
