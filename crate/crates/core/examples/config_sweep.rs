//! Three geometries run concurrently from one in-code configuration.

use axwave::config::{GeometrySpec, RunConfig};
use axwave::runner::sweep;
use axwave::ModelParams;

fn main() -> axwave::Result<()> {
    let dir = std::env::temp_dir().join("axwave_config_sweep");
    let geometries = [
        ("constant", GeometrySpec::constant(600.0)),
        ("pearls", GeometrySpec::pearls(0.8, 0.1, 600.0)),
        ("swelling", GeometrySpec::swelling(0.8, 0.3, 0.4, 300.0, 80.0, 600.0)),
    ];
    let configs: Vec<RunConfig> = geometries
        .iter()
        .map(|(name, g)| {
            let mut c = RunConfig::with_model(ModelParams::fig1());
            c.geometry = g.clone();
            c.grid.n = 1200;
            c.grid.m = 1;
            c.time.t_end = 100.0;
            c.time.snapshot_times = vec![50.0, 100.0];
            c.output.dir = dir.join(name);
            c
        })
        .collect();
    for c in &configs {
        c.validate()?;
    }
    for (r, (name, _)) in sweep(&configs, 3)?.into_iter().zip(&geometries) {
        let o = r?;
        let x: Vec<String> = o.summary.snapshot_positions.iter().map(|(t, x)| format!("x({t}) = {x:.2}")).collect();
        println!("{name:<9} speed {:.4}  {}  -> {}", o.summary.speed.unwrap_or(f64::NAN), x.join("  "), o.dir.display());
    }
    Ok(())
}
