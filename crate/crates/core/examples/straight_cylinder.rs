//! Front launched from a step on the straight cylinder, tracked to t = 180.

use std::time::Instant;

use axwave::front::{front_position, measure_speed};
use axwave::timestepper::{simulate, step_initial_condition, StaticProblem};
use axwave::{AxialScheme, Grid1D, Grid2D, ImexConfig, ModelParams, SurfaceProfile};

fn main() -> axwave::Result<()> {
    let p = ModelParams::fig1();
    let profile = SurfaceProfile::constant(p.radius, 1000.0)?;
    let grid = Grid2D::new(Grid1D::new(2000, 1000.0)?, 32)?;
    let problem = StaticProblem::new(&profile, grid, &p, AxialScheme::Composed)?;
    let cfg = ImexConfig::new(0.05, 180.0)?.with_snapshots(vec![60.0, 100.0, 180.0])?;

    let t0 = Instant::now();
    let traj = simulate(&problem, step_initial_condition(&grid, 100.0, 5.0), &cfg)?;
    println!("{} steps in {:.1?}", cfg.steps().0, t0.elapsed());

    for (t, u) in traj.times.iter().zip(&traj.snapshots) {
        let x = front_position(&u.u1, u.m(), 0.5, grid.axial())?;
        let (lo, hi) = u.u1.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        println!("t = {t:5.1}: front at x = {x:8.3}, u1 in [{lo:.4}, {hi:.4}]");
    }
    let pos = traj.positions();
    let window = |a: f64, b: f64| {
        let (t, x): (Vec<f64>, Vec<f64>) = pos.iter().filter(|(t, _)| *t >= a && *t <= b).copied().unzip();
        measure_speed(&t, &x)
    };
    let early = window(60.0, 100.0)?;
    let late = window(100.0, 180.0)?;
    println!("speed on [60,100] = {:.5}, on [100,180] = {:.5}", early.speed, late.speed);
    Ok(())
}
