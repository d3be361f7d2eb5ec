//! The straight-cylinder front launched on a pearled surface, tracked by its
//! distance to the family of translated fronts.

use axwave::front::{dist_to_manifold, DistanceOptions};
use axwave::runner::perturbed_front;
use axwave::timestepper::{StaticProblem, StaticStepper};
use axwave::{compute_front, AxialScheme, FrontOptions, Grid1D, Grid2D, ModelParams, Scheme, SurfaceProfile};

fn main() -> axwave::Result<()> {
    let p = ModelParams::fig1();
    let front = compute_front(&p, &Grid1D::with_origin(1600, 800.0, -600.0)?, &FrontOptions::default())?;
    let grid = Grid2D::new(Grid1D::new(2000, 1000.0)?, 8)?;
    let opts = DistanceOptions::default();

    for amp in [0.0, 0.05, 0.1] {
        let prof = SurfaceProfile::pearls(p.radius, amp, 1000.0)?;
        let problem = StaticProblem::new(&prof, grid, &p, AxialScheme::Composed)?;
        let mut u = perturbed_front(&front, &problem, 100.0, 0.0)?;
        let mut stepper = StaticStepper::new(&problem.lap, &p, 0.05, Scheme::Cnab2)?;
        println!("pearls amplitude {amp}");
        for k in 0..=4 {
            if k > 0 {
                for _ in 0..800 {
                    stepper.step(&mut u)?;
                }
            }
            let d = dist_to_manifold(&u, &front, &grid, &problem.norm, &opts)?;
            println!("  t = {:>5.1}  dist = {:.4e}  shift = {:.3}", 40.0 * k as f64, d.distance, d.h_star);
        }
    }
    Ok(())
}
