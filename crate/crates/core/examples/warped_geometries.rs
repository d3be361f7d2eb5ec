//! Metric weights, warp size and Laplace-Beltrami stencils for the pearls and
//! swelling surfaces.

use axwave::{assemble_laplace_beltrami, AxialScheme, Grid1D, Grid2D, ModelParams, SurfaceProfile};

fn main() -> axwave::Result<()> {
    let p = ModelParams::fig1();
    let l = 1000.0;
    let axial = Grid1D::new(2000, l)?;
    let grid = Grid2D::new(axial, 32)?;
    let surfaces = [
        SurfaceProfile::constant(0.8, l)?,
        SurfaceProfile::pearls(0.8, 0.1, l)?,
        SurfaceProfile::swelling(0.8, 0.3, 0.4, 530.0, 120.0, l)?,
    ];
    println!("{:<10} {:>9} {:>9} {:>9} {:>12}", "surface", "rho_min", "rho_max", "delta", "|L 1|_inf");
    for s in &surfaces {
        let (lo, hi) = axial
            .nodes()
            .map(|x| s.radius(x))
            .fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r), b.max(r)));
        let lap = assemble_laplace_beltrami(s, &grid, &p, AxialScheme::Composed)?;
        let ones = lap.apply(&vec![1.0; grid.size()]);
        let leak = ones.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!(
            "{:<10} {lo:>9.4} {hi:>9.4} {:>9.5} {leak:>12.2e}",
            s.kind_name(),
            s.warp_delta(p.radius, &axial)
        );
    }

    println!("\nswelling metric near its center");
    println!("{:>8} {:>8} {:>8} {:>8} {:>8}", "x", "rho", "rho'", "w1", "w2");
    for x in [410.0, 470.0, 530.0, 590.0, 650.0] {
        let m = surfaces[2].metric(x)?;
        println!("{x:>8.1} {:>8.4} {:>8.4} {:>8.4} {:>8.4}", m.rho, surfaces[2].radius_d1(x), m.w1, m.w2);
    }
    Ok(())
}
