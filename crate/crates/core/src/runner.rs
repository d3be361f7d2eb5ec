//! Experiment drivers, the sweep runner and the command-line interface.
//!
//! Every run writes into its own output directory and finishes by writing
//! `manifest.toml`, which lists each produced file with its SHA-256.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{parse_config, ExperimentKind, RunConfig};
use crate::error::{Error, Result};
use crate::front::{compute_front, dist_to_manifold, front_position, manifold_member, measure_speed, Distance};
use crate::front::{DistanceOptions, FrontOptions, FrontProfile};
use crate::grid::{Field, Grid2D};
use crate::io::{self, Manifest};
use crate::model::{rest_states, ModelParams};
use crate::spectral::{self, SpectrumOptions};
use crate::timestepper::{simulate, step_initial_condition, StaticProblem, Trajectory};

/// Headline numbers of a finished run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunSummary {
    pub experiment: String,
    pub geometry: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_front_position: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_shift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u1_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u1_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub front_speed: Option<f64>,
    /// `(t, front position)` at each snapshot time.
    pub snapshot_positions: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub spectra: Vec<ModeSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSummary {
    pub n: usize,
    pub max_real: f64,
    pub gap: f64,
    pub eta: f64,
    pub tol_disc: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_eigenvalue: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_violations: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub summary: RunSummary,
}

/// Output directory bookkeeping for one run.
struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Outputs { dir, files: Vec::new() })
    }

    fn path(&mut self, name: impl Into<PathBuf>) -> PathBuf {
        let name = name.into();
        let p = self.dir.join(&name);
        self.files.push(name);
        p
    }
}

fn grid_hash(grid: &Grid2D) -> String {
    let a = grid.axial();
    io::sha256_hex(format!("{}:{}:{}:{}", a.len(), a.length(), a.origin(), grid.m()).as_bytes())[..16].to_string()
}

fn front_options(cfg: &RunConfig) -> FrontOptions {
    FrontOptions {
        dt: cfg.time.dt,
        ..FrontOptions::default()
    }
}

fn reference_front(cfg: &RunConfig) -> Result<FrontProfile> {
    compute_front(&cfg.front_params()?, &cfg.front.grid()?, &front_options(cfg))
}

/// Front placed with its level crossing at `x0`, plus an angularly
/// non-uniform Gaussian bump in `u1` of relative size `bump`.
pub fn perturbed_front(front: &FrontProfile, problem: &StaticProblem, x0: f64, bump: f64) -> Result<Field> {
    let h = x0 - front.position()?;
    let mut u = manifold_member(front, &problem.grid, h);
    if bump > 0.0 {
        let grid = &problem.grid;
        let mut v = Field::zeros_like(grid);
        for i in 0..grid.n() {
            let x = grid.axial().node(i);
            let g = (-((x - x0 - 10.0) / 10.0).powi(2)).exp();
            for j in 0..grid.m() {
                v.u1[grid.index(i, j)] = 0.25 * g * (1.0 + grid.theta(j).cos());
            }
        }
        let target = bump * problem.norm.h21(&u);
        let s = target / problem.norm.h21(&v);
        u.axpy(s, &v);
    }
    Ok(u)
}

fn extrema(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

/// Least-squares speed over the last two thirds of the run.
fn late_speed(traj: &Trajectory) -> Option<f64> {
    let t_end = traj.final_time;
    let (t, x): (Vec<f64>, Vec<f64>) = traj
        .positions()
        .into_iter()
        .filter(|(t, _)| *t >= t_end / 3.0)
        .unzip();
    measure_speed(&t, &x).ok().map(|f| f.speed)
}

fn run_static(cfg: &RunConfig, out: &mut Outputs, with_distance: bool) -> Result<(RunSummary, String, String)> {
    let profile = cfg.profile()?;
    let grid = cfg.grid2d()?;
    let problem = StaticProblem::new(&profile, grid, &cfg.model, cfg.geometry.scheme)?;
    let from_front = with_distance || cfg.initial.kind == "front";
    let front = if from_front { Some(reference_front(cfg)?) } else { None };
    let initial = match &front {
        Some(f) => perturbed_front(f, &problem, cfg.initial.x_f, cfg.initial.bump)?,
        None => step_initial_condition(&grid, cfg.initial.x_f, cfg.initial.width),
    };
    let traj = simulate(&problem, initial, &cfg.imex()?)?;

    let mut summary = RunSummary {
        experiment: cfg.experiment.as_str().into(),
        geometry: profile.kind_name().into(),
        speed: late_speed(&traj),
        final_front_position: front_position(&traj.final_state.u1, grid.m(), 0.5, grid.axial()).ok(),
        ..Default::default()
    };
    let (lo, hi) = traj
        .snapshots
        .iter()
        .chain(std::iter::once(&traj.final_state))
        .map(|u| extrema(&u.u1))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (l, h)| (a.min(l), b.max(h)));
    summary.u1_min = Some(lo);
    summary.u1_max = Some(hi);

    for (t, u) in traj.times.iter().zip(&traj.snapshots) {
        io::write_snapshot(u, *t, &out.path(io::snapshot_name(*t)))?;
        if let Ok(x) = front_position(&u.u1, grid.m(), 0.5, grid.axial()) {
            summary.snapshot_positions.push((*t, x));
        }
    }
    io::write_diagnostics(&traj.diagnostics, &out.path("diagnostics.csv"))?;

    if let Some(front) = &front {
        summary.front_speed = Some(front.c);
        let opts = DistanceOptions {
            margin: cfg.distance.margin,
            scan_half_width: cfg.distance.scan_half_width,
            ..Default::default()
        };
        let rows: Vec<(f64, Distance)> = traj
            .times
            .iter()
            .zip(&traj.snapshots)
            .map(|(t, u)| Ok((*t, dist_to_manifold(u, front, &grid, &problem.norm, &opts)?)))
            .collect::<Result<_>>()?;
        if let Some((_, d)) = rows.last() {
            summary.final_shift = Some(d.h_star);
        }
        summary.max_distance = rows.iter().map(|(_, d)| d.distance).reduce(f64::max);
        io::write_distances(&rows, &out.path("distances.csv"))?;
    }
    Ok((summary, profile.fingerprint(), grid_hash(&grid)))
}

fn run_front(cfg: &RunConfig, out: &mut Outputs) -> Result<(RunSummary, String, String)> {
    let front = reference_front(cfg)?;
    io::write_front(&front, &out.path("front.csv"), &out.path("front.toml"))?;
    let summary = RunSummary {
        experiment: cfg.experiment.as_str().into(),
        geometry: "constant".into(),
        front_speed: Some(front.c),
        ..Default::default()
    };
    let g = Grid2D::axisymmetric(front.grid);
    Ok((summary, front.fingerprint(), grid_hash(&g)))
}

fn run_spectrum(cfg: &RunConfig, out: &mut Outputs) -> Result<(RunSummary, String, String)> {
    let p = cfg.front_params()?;
    let front = reference_front(cfg)?;
    io::write_front(&front, &out.path("front.csv"), &out.path("front.toml"))?;
    let tol = spectral::tol_disc(&front);
    let opts = SpectrumOptions {
        label_modes: cfg.spectrum.label_modes,
        ..Default::default()
    };
    let mut summary = RunSummary {
        experiment: cfg.experiment.as_str().into(),
        geometry: "constant".into(),
        front_speed: Some(front.c),
        ..Default::default()
    };
    for &n in &cfg.spectrum.modes {
        let block = spectral::assemble_ln(&front, n, &p);
        let rep = spectral::spectrum_block(&block, &opts)?;
        io::write_spectrum(&rep, &out.path(format!("spectrum_n{n}.csv")))?;
        let probe = (n > 0 && cfg.spectrum.samples > 0)
            .then(|| spectral::dissipativity_probe(&block, cfg.spectrum.samples, -rep.eta + tol, cfg.spectrum.seed));
        summary.spectra.push(ModeSummary {
            n,
            max_real: rep.max_real(),
            gap: rep.gap,
            eta: rep.eta,
            tol_disc: tol,
            zero_eigenvalue: rep.zero_eigenvalue().map(|z| [z.re, z.im]),
            probe_max: probe.map(|r| r.max_rayleigh),
            probe_violations: probe.map(|r| r.violations),
        });
    }
    let g = Grid2D::axisymmetric(front.grid);
    Ok((summary, front.fingerprint(), grid_hash(&g)))
}

/// Runs a single (non-sweep) experiment into `cfg.output_dir()`.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut out = Outputs::new(cfg.output_dir())?;
    let (summary, geometry_hash, grid_hash) = match cfg.experiment {
        ExperimentKind::Simulate2d => run_static(cfg, &mut out, false)?,
        ExperimentKind::Distance => run_static(cfg, &mut out, true)?,
        ExperimentKind::Front1d => run_front(cfg, &mut out)?,
        ExperimentKind::Spectrum => run_spectrum(cfg, &mut out)?,
        ExperimentKind::Sweep => {
            return Err(Error::Config {
                key: "experiment".into(),
                reason: "use `sweep` for sweep configs".into(),
            })
        }
    };
    let summary_path = out.path("summary.toml");
    io::write_atomic(&summary_path, io::toml_string(&summary)?.as_bytes())?;
    let echo = cfg.echo()?;
    io::write_atomic(&out.path("config.toml"), echo.as_bytes())?;
    let manifest = Manifest::build(
        &out.dir,
        cfg.experiment.as_str(),
        echo,
        geometry_hash,
        grid_hash,
        start.elapsed().as_secs_f64(),
        &out.files,
    )?;
    manifest.write(&out.dir)?;
    Ok(RunOutcome {
        dir: out.dir,
        manifest,
        summary,
    })
}

/// Runs every config concurrently on `threads` workers (0 = rayon default).
///
/// Output directories must be distinct; this is checked before anything runs.
/// A failed member is reported in its slot and does not stop the others.
pub fn sweep(configs: &[RunConfig], threads: usize) -> Result<Vec<Result<RunOutcome>>> {
    let mut seen = HashSet::new();
    for c in configs {
        let dir = normalize(&c.output_dir());
        if !seen.insert(dir.clone()) {
            return Err(Error::Config {
                key: "output.dir".into(),
                reason: format!("duplicate output directory {}", dir.display()),
            });
        }
    }
    if configs.is_empty() {
        return Ok(Vec::new());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Solver(e.to_string()))?;
    Ok(pool.install(|| configs.par_iter().map(run_experiment).collect()))
}

fn normalize(p: &Path) -> PathBuf {
    let mut out = PathBuf::new();
    for c in p.components() {
        match c {
            std::path::Component::CurDir => {}
            std::path::Component::ParentDir => {
                if !out.pop() {
                    out.push("..");
                }
            }
            other => out.push(other),
        }
    }
    out
}

pub const SWEEP_HEADER: [&str; 7] = ["name", "geometry", "status", "speed", "final_front_position", "max_dist", "error"];

/// Loads the members of a sweep config, runs them and writes `sweep.csv`
/// plus a manifest into the sweep's own output directory.
pub fn run_sweep(cfg: &RunConfig, threads: usize) -> Result<(PathBuf, Vec<Result<RunOutcome>>)> {
    let start = Instant::now();
    let spec = cfg.sweep.as_ref().ok_or_else(|| Error::Config {
        key: "sweep".into(),
        reason: "missing section".into(),
    })?;
    let mut members = Vec::with_capacity(spec.configs.len());
    let mut names = Vec::with_capacity(spec.configs.len());
    for rel in &spec.configs {
        let mut m = parse_config(&cfg.base_dir.join(rel))?;
        if matches!(m.experiment, ExperimentKind::Sweep) {
            return Err(Error::Config {
                key: "sweep.configs".into(),
                reason: format!("{} is itself a sweep", rel.display()),
            });
        }
        let name = rel.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_string();
        // members write below the sweep directory
        m.output.dir = cfg.output_dir().join(&name);
        m.base_dir = PathBuf::from(".");
        if m.geometry.file.is_some() {
            m.geometry.file = m.geometry.file.map(|f| cfg.base_dir.join(rel).parent().unwrap_or(Path::new(".")).join(f));
        }
        names.push(name);
        members.push(m);
    }
    let results = sweep(&members, threads)?;
    let mut out = Outputs::new(cfg.output_dir())?;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(SWEEP_HEADER)?;
    for ((name, m), r) in names.iter().zip(&members).zip(&results) {
        let row = match r {
            Ok(o) => vec![
                name.clone(),
                o.summary.geometry.clone(),
                "ok".into(),
                fmt(o.summary.speed),
                fmt(o.summary.final_front_position),
                fmt(o.summary.max_distance),
                String::new(),
            ],
            Err(e) => vec![
                name.clone(),
                m.geometry.kind.clone(),
                "failed".into(),
                String::new(),
                String::new(),
                String::new(),
                e.to_string(),
            ],
        };
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    io::write_atomic(&out.path("sweep.csv"), &bytes)?;
    let echo = cfg.echo()?;
    let manifest = Manifest::build(
        &out.dir,
        "sweep",
        echo,
        String::new(),
        String::new(),
        start.elapsed().as_secs_f64(),
        &out.files,
    )?;
    manifest.write(&out.dir)?;
    Ok((out.dir, results))
}

/// Derived constants of a configuration, as printed by `info`.
pub fn info_text(cfg: &RunConfig) -> Result<String> {
    let p: &ModelParams = &cfg.model;
    let d = p.derived();
    let profile = cfg.profile()?;
    let grid = cfg.grid2d()?;
    let mut s = String::new();
    s.push_str(&format!("experiment      {}\n", cfg.experiment.as_str()));
    s.push_str(&format!("diffusivity D   {:.6}\n", d.diffusivity));
    s.push_str(&format!("eta             {:.6e}\n", d.eta));
    s.push_str(&format!("speed estimate  {:.6}\n", (d.diffusivity / 2.0).sqrt() * (1.0 - 2.0 * p.alpha)));
    for (u1, u2) in rest_states(p) {
        s.push_str(&format!("rest state      ({u1:.6}, {u2:.6})\n"));
    }
    s.push_str(&format!(
        "geometry        {} on [0, {}], hash {}\n",
        profile.kind_name(),
        profile.length(),
        profile.fingerprint()
    ));
    s.push_str(&format!(
        "warp delta      {:.6e} (against R = {})\n",
        profile.warp_delta(cfg.front.radius.unwrap_or(p.radius), grid.axial()),
        cfg.front.radius.unwrap_or(p.radius)
    ));
    s.push_str(&format!(
        "grid            N = {}, M = {}, dx = {}, dtheta = {:.6}\n",
        grid.n(),
        grid.m(),
        grid.axial().dx(),
        2.0 * PI / grid.m() as f64
    ));
    let (steps, dt) = cfg.imex()?.steps();
    s.push_str(&format!("time            {steps} steps of {dt}, scheme {:?}\n", cfg.time.scheme));
    Ok(s)
}

#[derive(Debug, Parser)]
#[command(name = "axwave", version, about = "Traveling fronts on straight and warped cylinders")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Seed for probe sampling.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Static-frame simulation: snapshots and diagnostics.
    Simulate(CommonArgs),
    /// Co-moving front profile.
    Front(CommonArgs),
    /// Spectra of the linearization about the front.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Angular modes, comma separated.
        #[arg(long, value_delimiter = ',')]
        modes: Option<Vec<usize>>,
    },
    /// Simulation started from the front with distances to the front family.
    Dist(CommonArgs),
    /// Several configs at once with a comparison table.
    Sweep(CommonArgs),
    /// Derived constants of a config.
    Info(CommonArgs),
}

fn load(common: &CommonArgs, kind: Option<ExperimentKind>) -> Result<RunConfig> {
    let mut cfg = parse_config(&common.config)?;
    if let Some(k) = kind {
        cfg.experiment = k;
    }
    if let Some(out) = &common.out {
        cfg.output.dir = out.clone();
        // `--out` is relative to the working directory, not the config file
        if out.is_relative() {
            cfg.output.dir = std::env::current_dir()?.join(out);
        }
    }
    if let Some(seed) = common.seed {
        cfg.spectrum.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Exit status for an error: 1 for bad input, 2 for failures while running.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::InvalidParameter { .. } | Error::Domain { .. } | Error::TooLarge { .. } => 1,
        _ => 2,
    }
}

fn dispatch(cmd: Command) -> Result<String> {
    match cmd {
        Command::Simulate(c) => report(run_experiment(&load(&c, Some(ExperimentKind::Simulate2d))?)?),
        Command::Front(c) => report(run_experiment(&load(&c, Some(ExperimentKind::Front1d))?)?),
        Command::Dist(c) => report(run_experiment(&load(&c, Some(ExperimentKind::Distance))?)?),
        Command::Spectrum { common, modes } => {
            let mut cfg = load(&common, Some(ExperimentKind::Spectrum))?;
            if let Some(m) = modes {
                cfg.spectrum.modes = m;
            }
            report(run_experiment(&cfg)?)
        }
        Command::Sweep(c) => {
            let cfg = load(&c, Some(ExperimentKind::Sweep))?;
            let (dir, results) = run_sweep(&cfg, c.threads)?;
            let failed = results.iter().filter(|r| r.is_err()).count();
            let mut s = format!("{} runs, {failed} failed, table in {}\n", results.len(), dir.join("sweep.csv").display());
            for r in &results {
                if let Err(e) = r {
                    s.push_str(&format!("  failed: {e}\n"));
                }
            }
            if failed > 0 {
                eprint!("{s}");
                return Err(Error::Solver(format!("{failed} sweep member(s) failed")));
            }
            Ok(s)
        }
        Command::Info(c) => info_text(&load(&c, None)?),
    }
}

fn report(o: RunOutcome) -> Result<String> {
    Ok(format!(
        "wrote {} files to {}\n{}",
        o.manifest.files.len() + 1,
        o.dir.display(),
        io::toml_string(&o.summary)?
    ))
}

/// Entry point of the `axwave` binary; returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
