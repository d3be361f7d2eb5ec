use axwave::grid::{Field, Grid1D, Grid2D};
use axwave::model::{kinetics_f, kinetics_fprime, nonlinear_remainder, rhs_moving, rhs_static, ModelParams};
use axwave::operators::{assemble_laplace_beltrami, AxialScheme, MovingOps};
use axwave::SurfaceProfile;
use proptest::prelude::*;

fn profiles() -> impl Strategy<Value = SurfaceProfile> {
    prop_oneof![
        (0.2f64..1.5).prop_map(|r| SurfaceProfile::constant(r, 1000.0).unwrap()),
        (0.3f64..1.0, 0.0f64..0.2, 1.0f64..6.0)
            .prop_map(|(b, a, k)| SurfaceProfile::pearls_with_lobes(b, a, k, 1000.0).unwrap()),
        (0.6f64..1.0, -0.3f64..0.3, 0.0f64..0.4, 200.0f64..800.0, 40.0f64..200.0)
            .prop_map(|(b, s, a, c, w)| SurfaceProfile::swelling(b, s, a, c, w, 1000.0).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_weights_are_positive_and_consistent(prof in profiles()) {
        let g = Grid1D::new(500, 1000.0).unwrap();
        for x in g.nodes() {
            let s = prof.metric(x).unwrap();
            prop_assert!(s.rho > 0.0 && s.g > 0.0 && s.w1 > 0.0 && s.w2 > 0.0);
            prop_assert!((s.g - s.w1 * s.w1).abs() <= 1e-12 * s.g);
            prop_assert!((s.w1 * s.w2 - s.rho.powi(4)).abs() <= 1e-12 * s.rho.powi(4));
        }
    }

    #[test]
    fn warp_delta_vanishes_only_for_the_reference_cylinder(r in 0.3f64..1.2, bump in prop_oneof![Just(0.0), 1e-3f64..0.2]) {
        let g = Grid1D::new(400, 1000.0).unwrap();
        let prof = SurfaceProfile::pearls(r, bump, 1000.0).unwrap();
        let d = prof.warp_delta(r, &g);
        if bump == 0.0 {
            prop_assert_eq!(d, 0.0);
        } else {
            prop_assert!(d > 0.0);
        }
        prop_assert!(SurfaceProfile::constant(r, 1000.0).unwrap().warp_delta(r * 1.01, &g) > 0.0);
    }

    #[test]
    fn rest_state_is_static_equilibrium(prof in profiles()) {
        let p = ModelParams::fig1();
        let grid = Grid2D::new(Grid1D::new(64, 1000.0).unwrap(), 8).unwrap();
        let lap = assemble_laplace_beltrami(&prof, &grid, &p, AxialScheme::Composed).unwrap();
        let rhs = rhs_static(&Field::zeros_like(&grid), &lap, &p).unwrap();
        prop_assert!(rhs.u1.iter().chain(&rhs.u2).all(|v| *v == 0.0));
    }

    #[test]
    fn remainder_is_quadratic(v1 in -1.0f64..1.0, phi in 0.0f64..1.0) {
        let p = ModelParams::fig1();
        // the quadratic coefficient vanishes at the inflection of f
        prop_assume!(v1.abs() > 1e-3 && (1.0 + p.alpha - 3.0 * phi).abs() > 0.25);
        let ratios: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|h| {
                let v = Field::from_1d(vec![h * v1], vec![0.0]).unwrap();
                nonlinear_remainder(&v, &[phi], &p).unwrap().u1[0] / (h * h)
            })
            .collect();
        let (lo, hi) = ratios.iter().fold((f64::MAX, f64::MIN), |(a, b), &r| (a.min(r.abs()), b.max(r.abs())));
        prop_assert!((hi - lo) / hi < 0.05, "{:?}", ratios);
    }
}

#[test]
fn tabulated_derivatives_converge_at_second_order() {
    let l = 1000.0;
    let exact = SurfaceProfile::pearls(0.8, 0.1, l).unwrap();
    let mut errs = Vec::new();
    for n in [201usize, 401, 801, 1601] {
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * l / (n - 1) as f64).collect();
        let rho: Vec<f64> = xs.iter().map(|&x| exact.radius(x)).collect();
        let tab = SurfaceProfile::tabulated(&xs, &rho).unwrap();
        let e = xs
            .iter()
            .map(|&x| {
                let (_, a1, a2) = tab.derivatives(x);
                let (_, b1, b2) = exact.derivatives(x);
                (a1 - b1).abs().max((a2 - b2).abs())
            })
            .fold(0.0, f64::max);
        errs.push(e);
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "{errs:?}");
    }
}

#[test]
fn fprime_matches_centered_difference() {
    let a = 0.01;
    let err = |h: f64| {
        (0..=200)
            .map(|k| -0.5 + 2.0 * k as f64 / 200.0)
            .map(|u| ((kinetics_f(u + h, a) - kinetics_f(u - h, a)) / (2.0 * h) - kinetics_fprime(u, a)).abs())
            .fold(0.0, f64::max)
    };
    let order = (err(1e-2) / err(5e-3)).log2();
    assert!((order - 2.0).abs() <= 0.1, "order {order}");
}

#[test]
fn static_and_moving_rhs_agree_for_axisymmetric_data() {
    let p = ModelParams::fig1();
    let axial = Grid1D::new(120, 60.0).unwrap();
    let grid = Grid2D::new(axial, 8).unwrap();
    let prof = SurfaceProfile::constant(p.radius, 60.0).unwrap();
    let lap = assemble_laplace_beltrami(&prof, &grid, &p, AxialScheme::Composed).unwrap();
    let u1: Vec<f64> = axial.nodes().map(|x| 0.5 * (1.0 - ((x - 30.0) / 3.0).tanh())).collect();
    let u2: Vec<f64> = u1.iter().map(|u| 0.05 * u * u).collect();
    let st = rhs_static(&Field::extend_axisymmetric(&u1, &u2, 8).unwrap(), &lap, &p).unwrap();
    let ops = MovingOps::composed(axial, p.diffusivity());
    let mv = rhs_moving(&Field::from_1d(u1, u2).unwrap(), 0.0, &ops, &p).unwrap();
    let scale = mv.u1.iter().map(|v| v.abs()).fold(1.0, f64::max);
    for i in 0..axial.len() {
        for j in 0..8 {
            assert!((st.u1[grid.index(i, j)] - mv.u1[i]).abs() <= 1e-12 * scale);
            assert!((st.u2[grid.index(i, j)] - mv.u2[i]).abs() <= 1e-15);
        }
    }
}
