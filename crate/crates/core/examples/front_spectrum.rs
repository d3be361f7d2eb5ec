//! Spectrum of the linearization about the front for a few angular modes,
//! with the translation mode, its adjoint and the spectral gap.

use std::time::Instant;

use axwave::front::{compute_front, FrontOptions};
use axwave::spectral::{adjoint_zero_mode, assemble_ln, rayleigh, spectrum_block, tol_disc, zero_mode, SpectrumOptions};
use axwave::{Grid1D, ModelParams};

fn main() -> axwave::Result<()> {
    let p = ModelParams::fig1();
    let grid = Grid1D::with_origin(1600, 800.0, -600.0)?;
    let front = compute_front(&p, &grid, &FrontOptions::default())?;
    println!("front speed c = {:.6}", front.c);

    let tau = front.tangent().to_stacked();
    let l0 = assemble_ln(&front, 0, &p);
    let kernel = zero_mode(&l0, &tau)?;
    let lt = l0.apply(&tau);
    println!(
        "||L0 tau|| / ||tau|| = {:.3e}, zero-mode Rayleigh quotient = {:.3e}",
        l0.norm(&lt) / l0.norm(&tau),
        rayleigh(&l0, &kernel)
    );
    let cos = l0.inner(&kernel, &tau) / (l0.norm(&kernel) * l0.norm(&tau));
    println!("angle(kernel, tau) = {:.3e} rad", cos.clamp(-1.0, 1.0).acos());
    let tau_star = adjoint_zero_mode(&l0, &kernel)?;
    println!("<tau, tau*> = {:.12}", l0.inner(&kernel, &tau_star));

    for n in [0usize, 1, 2, 4] {
        let t0 = Instant::now();
        let block = assemble_ln(&front, n, &p);
        let rep = spectrum_block(&block, &SpectrumOptions::default())?;
        print!("n = {n}: max Re = {:.6e}, gap = {:.6e}", rep.max_real(), rep.gap);
        if let Some(z) = rep.zero_eigenvalue() {
            print!(", zero eigenvalue = {:.3e}{:+.3e}i, next |lambda| = {:.4e}", z.re, z.im, rep.next_magnitude());
        }
        println!("  ({:.1?})", t0.elapsed());
    }
    println!("eta = {:.1e}, tol_disc = {:.3}", axwave::model::decay_rate_eta(&p), tol_disc(&front));
    Ok(())
}
