use std::sync::OnceLock;

use axwave::front::{dist_to_manifold, manifold_member, DistanceOptions};
use axwave::grid::{Grid1D, Grid2D};
use axwave::model::{decay_rate_eta, kinetics_fprime, ModelParams};
use axwave::norms::shift_field;
use axwave::operators::AxialScheme;
use axwave::spectral::{
    adjoint_zero_mode, assemble_ln, spectrum_block, weighted_adjoint, zero_mode, RieszProjection, SpectrumOptions,
};
use axwave::timestepper::{simulate, step_initial_condition, StaticProblem};
use axwave::{compute_front, sparse, FrontOptions, FrontProfile, ImexConfig, SurfaceProfile};
use faer::linalg::solvers::Solve;
use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn coarse_front() -> &'static FrontProfile {
    static F: OnceLock<FrontProfile> = OnceLock::new();
    F.get_or_init(|| front_on(800, 0.0))
}

fn front_on(n: usize, shift: f64) -> FrontProfile {
    let g = Grid1D::with_origin(n, 800.0, -600.0 + shift).unwrap();
    compute_front(&ModelParams::fig1(), &g, &FrontOptions::default()).unwrap()
}

fn tangent_residual(f: &FrontProfile) -> f64 {
    // interior rows only; the truncated tails do not satisfy the zero-flux closure
    let block = assemble_ln(f, 0, &f.params);
    let tau = f.tangent().to_stacked();
    let r = block.apply(&tau);
    let n = f.grid.len();
    let interior = |v: &[f64]| -> Vec<f64> {
        (0..2 * n).map(|k| if k % n < 4 || k % n >= n - 4 { 0.0 } else { v[k] }).collect()
    };
    block.norm(&interior(&r)) / block.norm(&tau)
}

#[test]
fn front_is_a_converged_traveling_wave() {
    let f = coarse_front();
    assert!(f.refined);
    assert!(f.phi1[0] > 0.9 && f.phi1[f.grid.len() - 1] < 1e-3);
    assert!((f.c - f.freeze_speed).abs() / f.c < 1e-3);
    // grid shifted by ten cells gives the same speed
    let g = front_on(800, 10.0 * f.grid.dx());
    assert!((g.c - f.c).abs() / f.c <= 1e-6, "{} vs {}", g.c, f.c);
}

#[test]
fn tangent_is_a_second_order_kernel() {
    let r1 = tangent_residual(coarse_front());
    let r2 = tangent_residual(&front_on(1600, 0.0));
    let order = (r1 / r2).log2();
    assert!((order - 2.0).abs() <= 0.3, "{r1:.3e} {r2:.3e} order {order:.3}");
}

#[test]
fn speeds_agree_across_methods() {
    let f = coarse_front();
    let p = ModelParams::fig1();
    let prof = SurfaceProfile::constant(p.radius, 1000.0).unwrap();
    let grid = Grid2D::axisymmetric(Grid1D::new(2000, 1000.0).unwrap());
    let problem = StaticProblem::new(&prof, grid, &p, AxialScheme::Composed).unwrap();
    let traj = simulate(&problem, step_initial_condition(&grid, 100.0, 5.0), &ImexConfig::new(0.05, 180.0).unwrap()).unwrap();
    let (t, x): (Vec<f64>, Vec<f64>) = traj.positions().into_iter().filter(|(t, _)| *t >= 60.0).unzip();
    let c_static = axwave::front::measure_speed(&t, &x).unwrap().speed;
    for (a, b) in [(c_static, f.c), (c_static, f.freeze_speed), (f.c, f.freeze_speed)] {
        assert!((a - b).abs() / b <= 0.02, "{a} vs {b}");
    }
}

#[test]
fn distance_is_translation_equivariant() {
    let f = coarse_front();
    let p = ModelParams::fig1();
    let prof = SurfaceProfile::constant(p.radius, 1000.0).unwrap();
    let grid = Grid2D::new(Grid1D::new(2000, 1000.0).unwrap(), 8).unwrap();
    let problem = StaticProblem::new(&prof, grid, &p, AxialScheme::Composed).unwrap();
    let mut u = manifold_member(f, &grid, 600.0);
    for i in 0..grid.n() {
        let x = grid.axial().node(i);
        for j in 0..grid.m() {
            u.u1[grid.index(i, j)] += 0.05 * (-((x - 590.0) / 15.0).powi(2)).exp() * (1.0 + grid.theta(j).cos());
        }
    }
    let opts = DistanceOptions::default();
    let d0 = dist_to_manifold(&u, f, &grid, &problem.norm, &opts).unwrap();
    assert!((d0.h_star - 600.0).abs() < 2.0);
    let dx = grid.axial().dx();
    for a in [7.3, -4.1] {
        let moved = shift_field(&u, a, grid.axial()).unwrap();
        let d = dist_to_manifold(&moved, f, &grid, &problem.norm, &opts).unwrap();
        assert!((d.distance - d0.distance).abs() <= 1e-3 * d0.distance, "{d:?} vs {d0:?}");
        assert!((d.h_star - d0.h_star - a).abs() <= 1e-2 * dx, "{d:?} vs {d0:?}");
    }
}

#[test]
fn higher_modes_stay_below_the_decay_rate() {
    let f = coarse_front();
    let p = f.params;
    let eta = decay_rate_eta(&p);
    let eg = p.eps * p.gamma;
    let mut prev_gap = f64::INFINITY;
    for n in [1usize, 2, 4, 8] {
        let rep = spectrum_block(&assemble_ln(f, n, &p), &SpectrumOptions::default()).unwrap();
        let top = rep.max_real();
        assert!(top <= -eta + 1e-9, "n = {n}: {top:e}");
        // the rightmost eigenvalues belong to the u2 transport line Re = -eps gamma,
        // which they approach from the left as the u1 part is pushed away
        let gap = -eg - top;
        assert!(gap >= 0.0 && gap <= prev_gap, "n = {n}: {gap:e} after {prev_gap:e}");
        prev_gap = gap;
    }
}

#[test]
fn projection_is_rank_one_and_complementary() {
    let f = coarse_front();
    let block = assemble_ln(f, 0, &f.params);
    let tau = zero_mode(&block, &f.tangent().to_stacked()).unwrap();
    let tau_star = adjoint_zero_mode(&block, &tau).unwrap();
    let adj = weighted_adjoint(&block);
    let res = sparse::mul(&adj, &tau_star);
    assert!(block.norm(&res) / block.norm(&tau_star) <= f.grid.dx().powi(2));
    let p = RieszProjection::new(&block, tau.clone(), tau_star);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let v: Vec<f64> = block.weights.iter().map(|w| rng.random_range(-1.0..1.0) / w.sqrt()).collect();
        let pq = p.apply(&p.complement(&v));
        assert!(block.norm(&pq) <= 1e-12 * block.norm(&v));
        // P v is parallel to tau
        let pv = p.apply(&v);
        let k = p.coefficient(&v);
        let off: Vec<f64> = pv.iter().zip(&tau).map(|(a, t)| a - k * t).collect();
        assert!(block.norm(&off) <= 1e-12 * block.norm(&pv).max(1e-300));
    }
}

#[test]
fn one_step_map_tracks_the_rightmost_spectrum() {
    let g = Grid1D::with_origin(300, 600.0, -450.0).unwrap();
    let f = compute_front(&ModelParams::fig1(), &g, &FrontOptions::default()).unwrap();
    let p = f.params;
    let block = assemble_ln(&f, 0, &p);
    let size = block.size();
    let n = size / 2;
    let dt = 0.05;
    let l = sparse::to_dense(&block.matrix);
    // linear part implicit, kinetics explicit
    let mut lhs = Mat::<f64>::identity(size, size);
    let mut rhs = Mat::<f64>::identity(size, size);
    for i in 0..size {
        for j in 0..size {
            let mut a = l[(i, j)];
            if i == j && i < n {
                let fp = kinetics_fprime(f.phi1[i], p.alpha) / p.cm;
                a -= fp;
                rhs[(i, j)] += dt * fp;
            }
            lhs[(i, j)] -= dt * a;
        }
    }
    let step = lhs.partial_piv_lu().solve(&rhs);
    let mu = axwave::spectral::dense_eigenvalues(&step).unwrap();
    let lam = axwave::spectral::dense_eigenvalues(&l).unwrap();
    let mut by_re = lam.clone();
    by_re.sort_by(|a, b| b.re.total_cmp(&a.re));
    for (k, l) in by_re.iter().take(5).enumerate() {
        // first order agreement with 1 + dt lambda
        let target = c64::new(1.0 + dt * l.re, dt * l.im);
        let near = mu.iter().map(|z| (z - target).norm()).fold(f64::INFINITY, f64::min);
        assert!(near <= 1.5 * dt * dt * l.norm().powi(2) + 1e-9, "k = {k}: {l:?} misses by {near:e}");
    }
    let top = mu.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
    assert!((top - c64::new(1.0, 0.0)).norm() <= 1e-9, "{top:?}");
}
