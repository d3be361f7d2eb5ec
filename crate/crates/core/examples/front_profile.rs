//! Compute the reference traveling front on the co-moving line and print its speed.

use std::time::Instant;

use axwave::front::{compute_front, FrontOptions};
use axwave::{Grid1D, ModelParams};

fn main() -> axwave::Result<()> {
    let p = ModelParams::fig1();
    let grid = Grid1D::with_origin(1600, 800.0, -600.0)?;
    let t0 = Instant::now();
    let front = compute_front(&p, &grid, &FrontOptions::default())?;
    println!("c = {:.6} (freezing stage {:.6})", front.c, front.freeze_speed);
    println!(
        "residual = {:.3e}, ||Phi||_21 = {:.3}, newton iterations = {}, refined = {}",
        front.residual,
        front.norm_h21(),
        front.newton_iterations,
        front.refined
    );
    println!(
        "phi(z_min) = ({:.4}, {:.4}), phi(z_max) = ({:.2e}, {:.2e})",
        front.phi1[0],
        front.phi2[0],
        front.phi1[grid.len() - 1],
        front.phi2[grid.len() - 1]
    );
    println!("elapsed {:.2?}", t0.elapsed());
    Ok(())
}
