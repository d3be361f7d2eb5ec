use std::f64::consts::PI;

use axwave::grid::{Field, Grid1D, Grid2D};
use axwave::model::{upper_rest_state, ModelParams};
use axwave::norms::{weighted_inner, QuadratureWeights};
use axwave::operators::{assemble_laplace_beltrami, build_angular_operator, AxialScheme};
use axwave::timestepper::{simulate, StaticProblem, StaticStepper};
use axwave::{ImexConfig, Scheme, SurfaceProfile};
use proptest::prelude::*;

fn profiles() -> impl Strategy<Value = SurfaceProfile> {
    prop_oneof![
        (0.2f64..1.5).prop_map(|r| SurfaceProfile::constant(r, 500.0).unwrap()),
        (0.3f64..1.0, 0.0f64..0.2).prop_map(|(b, a)| SurfaceProfile::pearls(b, a, 500.0).unwrap()),
        (0.6f64..1.0, -0.3f64..0.3, 0.0f64..0.4, 100.0f64..400.0, 20.0f64..100.0)
            .prop_map(|(b, s, a, c, w)| SurfaceProfile::swelling(b, s, a, c, w, 500.0).unwrap()),
    ]
}

fn schemes() -> impl Strategy<Value = AxialScheme> {
    prop_oneof![Just(AxialScheme::Composed), Just(AxialScheme::Compact)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacian_annihilates_constants(prof in profiles(), scheme in schemes(), n in 16usize..300, m in prop_oneof![Just(1usize), Just(4), Just(8), Just(16)], c in -5.0f64..5.0) {
        let p = ModelParams::fig1();
        let axial = Grid1D::new(n, 500.0).unwrap();
        let grid = if m == 1 { Grid2D::axisymmetric(axial) } else { Grid2D::new(axial, m).unwrap() };
        let lap = assemble_laplace_beltrami(&prof, &grid, &p, scheme).unwrap();
        let y = lap.apply(&vec![c; grid.size()]);
        let tol = 1e-10 * lap.stencil_norm() * c.abs().max(1.0);
        for i in 2..n - 2 {
            for j in 0..m {
                prop_assert!(y[grid.index(i, j)].abs() <= tol);
            }
        }
    }

    #[test]
    fn weighted_inner_is_symmetric_positive(prof in profiles(), seed in any::<u64>(), eps in 1e-5f64..1.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grid = Grid2D::new(Grid1D::new(40, 500.0).unwrap(), 4).unwrap();
        let w = QuadratureWeights::surface(&prof, &grid).unwrap();
        let mut random = || {
            let a: Vec<f64> = (0..grid.size()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..grid.size()).map(|_| rng.random_range(-1.0..1.0)).collect();
            Field::from_parts(grid.n(), grid.m(), a, b).unwrap()
        };
        let (u, v) = (random(), random());
        let uv = weighted_inner(&u, &v, &w, eps).unwrap();
        let vu = weighted_inner(&v, &u, &w, eps).unwrap();
        prop_assert!((uv - vu).abs() <= 1e-12 * uv.abs().max(1.0));
        prop_assert!(weighted_inner(&u, &u, &w, eps).unwrap() > 0.0);
    }
}

#[test]
fn angular_operator_converges_at_second_order() {
    let grid_for = |m| Grid2D::new(Grid1D::new(8, 1.0).unwrap(), m).unwrap();
    let mut errs = Vec::new();
    for m in [8usize, 16, 32, 64] {
        let g = grid_for(m);
        let op = build_angular_operator(&g);
        let u: Vec<f64> = (0..g.size()).map(|k| (2.0 * g.theta(k % m)).cos()).collect();
        let y = op.apply(&u);
        let e = (0..g.size())
            .map(|k| (y[k] + 4.0 * (2.0 * g.theta(k % m)).cos()).abs())
            .fold(0.0, f64::max);
        errs.push(e);
    }
    for w in errs.windows(2) {
        assert!(((w[0] / w[1]).log2() - 2.0).abs() <= 0.2, "{errs:?}");
    }
}

#[test]
fn axial_operator_converges_on_neumann_data() {
    // u = cos(pi x / l) on a grid whose last node is l
    let mut errs = Vec::new();
    for n in [101usize, 201, 401, 801] {
        let dx = 100.0 / (n - 1) as f64;
        let l = n as f64 * dx;
        let prof = SurfaceProfile::constant(0.5, l).unwrap();
        let g = Grid1D::new(n, l).unwrap();
        let k = PI / (l - dx);
        let op = axwave::operators::build_axial_operator(&prof, &g, AxialScheme::Composed).unwrap();
        let u: Vec<f64> = g.nodes().map(|x| (k * x).cos()).collect();
        let y = op.apply(&u);
        let e = g
            .nodes()
            .zip(&y)
            .map(|(x, v)| (v + 0.25 * k * k * (k * x).cos()).abs())
            .fold(0.0, f64::max);
        errs.push(e);
    }
    for w in errs.windows(2) {
        assert!(((w[0] / w[1]).log2() - 2.0).abs() <= 0.2, "{errs:?}");
    }
}

fn small_problem(m: usize) -> StaticProblem {
    let p = ModelParams::fig1();
    let prof = SurfaceProfile::pearls(0.8, 0.1, 200.0).unwrap();
    let grid = Grid2D::new(Grid1D::new(100, 200.0).unwrap(), m).unwrap();
    StaticProblem::new(&prof, grid, &p, AxialScheme::Composed).unwrap()
}

#[test]
fn rest_state_survives_many_steps() {
    let problem = small_problem(4);
    for scheme in [Scheme::ImexEuler, Scheme::Cnab2] {
        let mut s = StaticStepper::new(&problem.lap, &problem.params, 0.05, scheme).unwrap();
        let mut u = Field::zeros_like(&problem.grid);
        for _ in 0..10_000 {
            s.step(&mut u).unwrap();
        }
        assert!(u.u1.iter().chain(&u.u2).all(|v| v.abs() <= 1e-14));
    }
}

fn smooth_initial(grid: &Grid2D) -> Field {
    let mut u = Field::zeros_like(grid);
    for i in 0..grid.n() {
        let x = grid.axial().node(i);
        for j in 0..grid.m() {
            let k = grid.index(i, j);
            u.u1[k] = 0.5 * (1.0 - ((x - 100.0) / 8.0).tanh()) * (1.0 + 0.1 * grid.theta(j).cos());
            u.u2[k] = 0.01 * u.u1[k];
        }
    }
    u
}

#[test]
fn temporal_self_convergence_matches_nominal_order() {
    let problem = small_problem(4);
    let u0 = smooth_initial(&problem.grid);
    for (scheme, nominal) in [(Scheme::ImexEuler, 1.0), (Scheme::Cnab2, 2.0)] {
        let run = |dt: f64| {
            let cfg = ImexConfig::new(dt, 4.0).unwrap().with_scheme(scheme);
            simulate(&problem, u0.clone(), &cfg).unwrap().final_state
        };
        // each run against one with a quarter of its step
        let e1 = run(0.1).max_abs_diff(&run(0.025));
        let e2 = run(0.05).max_abs_diff(&run(0.0125));
        let order = (e1 / e2).log2();
        assert!((order - nominal).abs() <= 0.2, "{scheme:?}: errors {e1:.3e} {e2:.3e}, order {order:.3}");
    }
}

#[test]
fn uniform_data_follows_bistable_kinetics() {
    let problem = small_problem(4);
    let cfg = ImexConfig::new(0.05, 300.0).unwrap();
    let mut low = Field::zeros_like(&problem.grid);
    low.u1.iter_mut().for_each(|v| *v = 0.005);
    let out = simulate(&problem, low, &cfg).unwrap().final_state;
    assert!(out.u1.iter().all(|v| v.abs() < 0.0025), "{}", out.u1[0]);

    let mut high = Field::zeros_like(&problem.grid);
    high.u1.iter_mut().for_each(|v| *v = 0.3);
    let out = simulate(&problem, high, &cfg).unwrap().final_state;
    let (u1_star, _) = upper_rest_state(&problem.params).unwrap();
    assert!(out.u1.iter().all(|v| *v > 0.5 && *v < 1.0), "{}", out.u1[0]);
    assert!(out.u2.iter().all(|v| *v > 0.0));
    assert!(u1_star > 0.5);
}
