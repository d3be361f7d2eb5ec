//! First- and second-order IMEX stepping compared on a short axisymmetric run.

use axwave::timestepper::{simulate, step_initial_condition, StaticProblem};
use axwave::{AxialScheme, Grid1D, Grid2D, ImexConfig, ModelParams, Scheme, SurfaceProfile};

fn main() -> axwave::Result<()> {
    let p = ModelParams::fig1();
    let prof = SurfaceProfile::constant(p.radius, 400.0)?;
    let grid = Grid2D::axisymmetric(Grid1D::new(800, 400.0)?);
    let problem = StaticProblem::new(&prof, grid, &p, AxialScheme::Composed)?;
    let u0 = step_initial_condition(&grid, 100.0, 5.0);
    let t_end = 40.0;

    for scheme in [Scheme::ImexEuler, Scheme::Cnab2] {
        let run = |dt: f64| simulate(&problem, u0.clone(), &ImexConfig::new(dt, t_end).unwrap().with_scheme(scheme));
        let reference = run(0.005)?;
        println!("{scheme:?}");
        for dt in [0.2, 0.1, 0.05] {
            let traj = run(dt)?;
            let err = traj.final_state.max_abs_diff(&reference.final_state);
            println!("  dt = {dt:<5} max |u - u_ref| = {err:.3e}");
        }
    }
    Ok(())
}
