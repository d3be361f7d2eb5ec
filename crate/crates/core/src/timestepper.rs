//! IMEX time stepping: linear part implicit, cubic kinetics explicit.
//!
//! Static frame: `u2` is eliminated from the implicit system, the angular
//! direction is diagonalized in a real orthonormal Fourier basis and each
//! angular mode is one banded axial solve. Moving frame: one interleaved
//! banded system in `(u1_i, u2_i)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::banded::{BandedLu, BandedMatrix};
use crate::error::{Error, Result};
use crate::front::front_position;
use crate::geometry::SurfaceProfile;
use crate::grid::{Field, Grid1D, Grid2D};
use crate::model::{kinetics_f, ModelParams};
use crate::norms::{NormOps, QuadratureWeights};
use crate::operators::{assemble_laplace_beltrami, AssembledOperator, AxialScheme, MovingOps};
use crate::sparse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Scheme {
    /// Backward Euler on the linear part, forward Euler on the kinetics. First order.
    ImexEuler,
    /// Crank–Nicolson with second-order Adams–Bashforth kinetics.
    #[default]
    #[serde(rename = "CNAB2", alias = "cnab2")]
    Cnab2,
}

impl Scheme {
    fn theta(self) -> f64 {
        match self {
            Scheme::ImexEuler => 1.0,
            Scheme::Cnab2 => 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImexConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub snapshot_times: Vec<f64>,
    /// Time between diagnostic rows.
    pub diagnostic_interval: f64,
}

impl ImexConfig {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        let c = ImexConfig {
            dt,
            t_end,
            scheme: Scheme::Cnab2,
            snapshot_times: Vec::new(),
            diagnostic_interval: 1.0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Result<Self> {
        self.snapshot_times = times;
        self.validate()?;
        Ok(self)
    }

    pub fn with_diagnostic_interval(mut self, dt: f64) -> Self {
        self.diagnostic_interval = dt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid("t_end", format!("must be non-negative, got {}", self.t_end)));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("snapshot_times", "must be strictly increasing"));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| **t < 0.0 || **t > self.t_end + 1e-12) {
            return Err(Error::invalid("snapshot_times", format!("{t} lies outside [0, t_end]")));
        }
        Ok(())
    }

    /// Step count and the uniform step that lands exactly on `t_end`.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

/// Real orthonormal eigenbasis of the periodic angular stencil.
#[derive(Debug, Clone)]
struct AngularBasis {
    m: usize,
    /// `q[j * m + k]`: basis vector `k` at node `j`.
    q: Vec<f64>,
    lambda: Vec<f64>,
}

impl AngularBasis {
    fn new(m: usize) -> Self {
        if m == 1 {
            return AngularBasis {
                m,
                q: vec![1.0],
                lambda: vec![0.0],
            };
        }
        let dth = 2.0 * PI / m as f64;
        let mut q = vec![0.0; m * m];
        let mut lambda = vec![0.0; m];
        let mut col = 0;
        let mut push = |q: &mut Vec<f64>, f: &dyn Fn(usize) -> f64, freq: usize| {
            for j in 0..m {
                q[j * m + col] = f(j);
            }
            lambda[col] = -(2.0 - 2.0 * (2.0 * PI * freq as f64 / m as f64).cos()) / (dth * dth);
            col += 1;
        };
        let a = (1.0 / m as f64).sqrt();
        let b = (2.0 / m as f64).sqrt();
        push(&mut q, &|_| a, 0);
        for k in 1..m / 2 {
            let w = 2.0 * PI * k as f64 / m as f64;
            push(&mut q, &|j| b * (w * j as f64).cos(), k);
            push(&mut q, &|j| b * (w * j as f64).sin(), k);
        }
        push(&mut q, &|j| if j % 2 == 0 { a } else { -a }, m / 2);
        AngularBasis { m, q, lambda }
    }

    /// `out[i, k] = sum_j u[i, j] q[j, k]`.
    fn forward(&self, u: &[f64], out: &mut [f64]) {
        let m = self.m;
        for (row, dst) in u.chunks(m).zip(out.chunks_mut(m)) {
            dst.fill(0.0);
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    let qrow = &self.q[j * m..(j + 1) * m];
                    for k in 0..m {
                        dst[k] += v * qrow[k];
                    }
                }
            }
        }
    }

    fn backward(&self, c: &[f64], out: &mut [f64]) {
        let m = self.m;
        for (row, dst) in c.chunks(m).zip(out.chunks_mut(m)) {
            for j in 0..m {
                let qrow = &self.q[j * m..(j + 1) * m];
                dst[j] = qrow.iter().zip(row).map(|(a, b)| a * b).sum();
            }
        }
    }
}

fn kinetics_term(u1: &[f64], p: &ModelParams, out: &mut [f64]) {
    for (o, &u) in out.iter_mut().zip(u1) {
        *o = kinetics_f(u, p.alpha) / p.cm;
    }
}

/// Single-step integrator for the static-frame system on a separable operator.
#[derive(Debug, Clone)]
pub struct StaticStepper {
    params: ModelParams,
    lap: AssembledOperator,
    scheme: Scheme,
    dt: f64,
    basis: AngularBasis,
    lus: Vec<BandedLu>,
    kinetics: bool,
    prev: Option<Vec<f64>>,
}

impl StaticStepper {
    pub fn new(lap: &AssembledOperator, params: &ModelParams, dt: f64, scheme: Scheme) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        let sep = lap
            .separable()
            .ok_or_else(|| Error::Solver("operator has no axial/angular split".into()))?;
        let (n, m) = (lap.n(), lap.m());
        let basis = AngularBasis::new(m);
        let th = scheme.theta();
        let k = th * dt / params.cm;
        let a = th * dt * params.eps;
        let s = 1.0 + th * dt * params.eps * params.gamma;
        let eye = sparse::identity(n);
        let mut lus = Vec::with_capacity(m);
        for &lam in &basis.lambda {
            let diag = 1.0 + k * a / s - k * sep.angular_scale * lam;
            let mat = sparse::linear_combination(diag, &eye, -k * sep.axial_scale, &sep.axial);
            lus.push(sparse::to_banded(&mat).factor()?);
        }
        Ok(StaticStepper {
            params: *params,
            lap: lap.clone(),
            scheme,
            dt,
            basis,
            lus,
            kinetics: true,
            prev: None,
        })
    }

    /// Drops the cubic term (for linear tests).
    pub fn linear_only(mut self) -> Self {
        self.kinetics = false;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Forgets the multistep history.
    pub fn reset(&mut self) {
        self.prev = None;
    }

    pub fn step(&mut self, state: &mut Field) -> Result<()> {
        let (n, m) = (self.lap.n(), self.lap.m());
        if state.dims() != (n, m) {
            return Err(Error::shape(format!("{n} x {m}"), format!("{} x {}", state.n(), state.m())));
        }
        let p = self.params;
        let dt = self.dt;
        let th = self.scheme.theta();
        let size = n * m;

        let mut nl = vec![0.0; size];
        if self.kinetics {
            kinetics_term(&state.u1, &p, &mut nl);
        }
        let explicit: Vec<f64> = match (self.scheme, &self.prev) {
            (Scheme::Cnab2, Some(old)) => nl.iter().zip(old).map(|(a, b)| 1.5 * a - 0.5 * b).collect(),
            _ => nl.clone(),
        };

        let mut b1 = state.u1.clone();
        let mut b2 = state.u2.clone();
        if th < 1.0 {
            let lap_u = self.lap.apply(&state.u1);
            let w = (1.0 - th) * dt;
            for i in 0..size {
                let (u1, u2) = (state.u1[i], state.u2[i]);
                b1[i] += w * (lap_u[i] - u2) / p.cm;
                b2[i] += w * p.eps * (u1 - p.gamma * u2);
            }
        }
        for i in 0..size {
            b1[i] += dt * explicit[i];
        }

        let k = th * dt / p.cm;
        let a = th * dt * p.eps;
        let s = 1.0 + th * dt * p.eps * p.gamma;
        let r: Vec<f64> = b1.iter().zip(&b2).map(|(x, y)| x - k * y / s).collect();

        let mut x1 = vec![0.0; size];
        if m == 1 {
            x1.copy_from_slice(&r);
            self.lus[0].solve_in_place(&mut x1);
        } else {
            let mut modal = vec![0.0; size];
            self.basis.forward(&r, &mut modal);
            let mut col = vec![0.0; n];
            for kk in 0..m {
                for i in 0..n {
                    col[i] = modal[i * m + kk];
                }
                self.lus[kk].solve_in_place(&mut col);
                for i in 0..n {
                    modal[i * m + kk] = col[i];
                }
            }
            self.basis.backward(&modal, &mut x1);
        }
        for i in 0..size {
            state.u2[i] = (b2[i] + a * x1[i]) / s;
        }
        state.u1 = x1;
        if self.scheme == Scheme::Cnab2 {
            self.prev = Some(nl);
        }
        Ok(())
    }
}

/// Interleaved `(u1_i, u2_i)` banded matrix of `shift I + scale L_c`, where
/// `L_c` is the co-moving linear operator with extra diagonal `diag1` in the `u1` row.
pub(crate) fn interleaved_system(
    ops: &MovingOps,
    c: f64,
    p: &ModelParams,
    diag1: Option<&[f64]>,
    shift: f64,
    scale: f64,
) -> BandedMatrix {
    let n = ops.len();
    let (kl_a, ku_a) = sparse::bandwidths(ops.diffusion());
    let half = 2 * kl_a.max(ku_a).max(1) + 1;
    let mut b = BandedMatrix::zeros(2 * n, half, half);
    for (i, row) in ops.diffusion().outer_iterator().enumerate() {
        for (j, &v) in row.iter() {
            b.add(2 * i, 2 * j, scale * v);
        }
    }
    for (i, row) in ops.dz().outer_iterator().enumerate() {
        for (j, &v) in row.iter() {
            b.add(2 * i, 2 * j, scale * c * v);
        }
    }
    for (i, row) in ops.dz_inflow().outer_iterator().enumerate() {
        for (j, &v) in row.iter() {
            b.add(2 * i + 1, 2 * j + 1, scale * c * v);
        }
    }
    for i in 0..n {
        let d = diag1.map_or(0.0, |d| d[i]);
        b.add(2 * i, 2 * i, shift + scale * d);
        b.add(2 * i, 2 * i + 1, -scale / p.cm);
        b.add(2 * i + 1, 2 * i, scale * p.eps);
        b.add(2 * i + 1, 2 * i + 1, shift - scale * p.eps * p.gamma);
    }
    b
}

/// Linear part of the co-moving right-hand side.
pub(crate) fn moving_linear(ops: &MovingOps, c: f64, p: &ModelParams, u: &Field) -> (Vec<f64>, Vec<f64>) {
    let d2 = sparse::mul(ops.diffusion(), &u.u1);
    let dz1 = sparse::mul(ops.dz(), &u.u1);
    let dz2 = sparse::mul(ops.dz_inflow(), &u.u2);
    let l1 = (0..u.n()).map(|i| d2[i] + c * dz1[i] - u.u2[i] / p.cm).collect();
    let l2 = (0..u.n())
        .map(|i| c * dz2[i] + p.eps * (u.u1[i] - p.gamma * u.u2[i]))
        .collect();
    (l1, l2)
}

/// Single-step integrator for the co-moving 1D system.
#[derive(Debug, Clone)]
pub struct MovingStepper {
    ops: MovingOps,
    params: ModelParams,
    scheme: Scheme,
    dt: f64,
    c: f64,
    lu: BandedLu,
    prev: Option<Vec<f64>>,
}

impl MovingStepper {
    pub fn new(ops: &MovingOps, params: &ModelParams, dt: f64, scheme: Scheme, c: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        let lu = Self::factor(ops, params, dt, scheme, c)?;
        Ok(MovingStepper {
            ops: ops.clone(),
            params: *params,
            scheme,
            dt,
            c,
            lu,
            prev: None,
        })
    }

    fn factor(ops: &MovingOps, p: &ModelParams, dt: f64, scheme: Scheme, c: f64) -> Result<BandedLu> {
        interleaved_system(ops, c, p, None, 1.0, -scheme.theta() * dt).factor()
    }

    pub fn speed(&self) -> f64 {
        self.c
    }

    pub fn set_speed(&mut self, c: f64) -> Result<()> {
        if c != self.c {
            self.lu = Self::factor(&self.ops, &self.params, self.dt, self.scheme, c)?;
            self.c = c;
        }
        Ok(())
    }

    pub fn step(&mut self, state: &mut Field) -> Result<()> {
        let n = self.ops.len();
        if state.dims() != (n, 1) {
            return Err(Error::shape(format!("{n} x 1"), format!("{} x {}", state.n(), state.m())));
        }
        let p = self.params;
        let dt = self.dt;
        let th = self.scheme.theta();
        let mut nl = vec![0.0; n];
        kinetics_term(&state.u1, &p, &mut nl);
        let explicit: Vec<f64> = match (self.scheme, &self.prev) {
            (Scheme::Cnab2, Some(old)) => nl.iter().zip(old).map(|(a, b)| 1.5 * a - 0.5 * b).collect(),
            _ => nl.clone(),
        };
        let mut rhs = vec![0.0; 2 * n];
        for i in 0..n {
            rhs[2 * i] = state.u1[i] + dt * explicit[i];
            rhs[2 * i + 1] = state.u2[i];
        }
        if th < 1.0 {
            let (l1, l2) = moving_linear(&self.ops, self.c, &p, state);
            let w = (1.0 - th) * dt;
            for i in 0..n {
                rhs[2 * i] += w * l1[i];
                rhs[2 * i + 1] += w * l2[i];
            }
        }
        self.lu.solve_in_place(&mut rhs);
        for i in 0..n {
            state.u1[i] = rhs[2 * i];
            state.u2[i] = rhs[2 * i + 1];
        }
        if self.scheme == Scheme::Cnab2 {
            self.prev = Some(nl);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub t: f64,
    pub front_position: Option<f64>,
    pub u1_min: f64,
    pub u1_max: f64,
    pub norm_h21: f64,
    pub c_frozen: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    pub diagnostics: Vec<DiagnosticRow>,
    pub final_state: Field,
    pub final_time: f64,
}

impl Trajectory {
    pub fn snapshot_at(&self, t: f64) -> Option<&Field> {
        self.times
            .iter()
            .position(|s| (s - t).abs() < 1e-9)
            .map(|k| &self.snapshots[k])
    }

    /// `(t, position)` pairs of the diagnostic rows that located a front.
    pub fn positions(&self) -> Vec<(f64, f64)> {
        self.diagnostics
            .iter()
            .filter_map(|d| d.front_position.map(|x| (d.t, x)))
            .collect()
    }
}

/// Everything the static-frame driver needs for one geometry.
#[derive(Debug, Clone)]
pub struct StaticProblem {
    pub grid: Grid2D,
    pub params: ModelParams,
    pub profile: SurfaceProfile,
    pub lap: AssembledOperator,
    pub norm: NormOps,
}

impl StaticProblem {
    pub fn new(profile: &SurfaceProfile, grid: Grid2D, params: &ModelParams, scheme: AxialScheme) -> Result<Self> {
        let lap = assemble_laplace_beltrami(profile, &grid, params, scheme)?;
        let weights = QuadratureWeights::surface(profile, &grid)?;
        let norm = NormOps::new(&lap, &grid, weights, params.eps)?;
        Ok(StaticProblem {
            grid,
            params: *params,
            profile: profile.clone(),
            lap,
            norm,
        })
    }
}

fn extrema(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

fn diag_row(t: f64, u: &Field, grid: &Grid1D, norm: &NormOps, c: Option<f64>) -> DiagnosticRow {
    let (lo, hi) = extrema(&u.u1);
    DiagnosticRow {
        t,
        front_position: front_position(&u.u1, u.m(), 0.5, grid).ok(),
        u1_min: lo,
        u1_max: hi,
        norm_h21: norm.h21(u),
        c_frozen: c,
    }
}

fn lerp(a: &Field, b: &Field, s: f64) -> Field {
    let mut out = a.clone();
    for (o, (x, y)) in out.u1.iter_mut().zip(a.u1.iter().zip(&b.u1)) {
        *o = x + s * (y - x);
    }
    for (o, (x, y)) in out.u2.iter_mut().zip(a.u2.iter().zip(&b.u2)) {
        *o = x + s * (y - x);
    }
    out
}

struct Recorder<'a> {
    cfg: &'a ImexConfig,
    next: usize,
    times: Vec<f64>,
    snaps: Vec<Field>,
}

impl<'a> Recorder<'a> {
    fn new(cfg: &'a ImexConfig, initial: &Field) -> Self {
        let mut r = Recorder {
            cfg,
            next: 0,
            times: Vec::new(),
            snaps: Vec::new(),
        };
        while r.next < cfg.snapshot_times.len() && cfg.snapshot_times[r.next] <= 1e-12 {
            r.times.push(cfg.snapshot_times[r.next]);
            r.snaps.push(initial.clone());
            r.next += 1;
        }
        r
    }

    fn advance(&mut self, t0: f64, old: &Field, t1: f64, new: &Field) {
        let h = t1 - t0;
        while self.next < self.cfg.snapshot_times.len() {
            let ts = self.cfg.snapshot_times[self.next];
            if ts > t1 + 1e-9 * h {
                break;
            }
            let s = ((ts - t0) / h).clamp(0.0, 1.0);
            let snap = if (1.0 - s).abs() < 1e-9 { new.clone() } else { lerp(old, new, s) };
            self.times.push(ts);
            self.snaps.push(snap);
            self.next += 1;
        }
    }
}

/// Static-frame run from `initial`.
pub fn simulate(problem: &StaticProblem, initial: Field, cfg: &ImexConfig) -> Result<Trajectory> {
    cfg.validate()?;
    initial.check_grid(&problem.grid)?;
    let (steps, dt) = cfg.steps();
    let mut stepper = StaticStepper::new(&problem.lap, &problem.params, dt, cfg.scheme)?;
    let every = ((cfg.diagnostic_interval / dt).round() as usize).max(1);
    let axial = problem.grid.axial();
    let mut state = initial;
    let mut diags = vec![diag_row(0.0, &state, axial, &problem.norm, None)];
    let mut rec = Recorder::new(cfg, &state);
    for k in 1..=steps {
        let t0 = (k - 1) as f64 * dt;
        let t1 = k as f64 * dt;
        let old = if rec.next < cfg.snapshot_times.len() { Some(state.clone()) } else { None };
        stepper.step(&mut state)?;
        if !state.is_finite() {
            return Err(Error::Divergence { step: k, t: t1 });
        }
        if let Some(old) = old {
            rec.advance(t0, &old, t1, &state);
        }
        if k % every == 0 || k == steps {
            diags.push(diag_row(t1, &state, axial, &problem.norm, None));
        }
    }
    Ok(Trajectory {
        times: rec.times,
        snapshots: rec.snaps,
        diagnostics: diags,
        final_time: steps as f64 * dt,
        final_state: state,
    })
}

/// Proportional speed control holding the front at its initial position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Freezing {
    pub gain: f64,
    pub level: f64,
}

impl Default for Freezing {
    fn default() -> Self {
        Freezing { gain: 0.5, level: 0.5 }
    }
}

/// Co-moving run at speed `c`, optionally adjusting `c` to freeze the front.
pub fn simulate_moving(
    ops: &MovingOps,
    params: &ModelParams,
    state0: Field,
    c: f64,
    cfg: &ImexConfig,
    freezing: Option<Freezing>,
) -> Result<Trajectory> {
    cfg.validate()?;
    if c < 0.0 {
        return Err(Error::invalid("c", "speed must be non-negative"));
    }
    let grid = *ops.grid();
    if state0.dims() != (grid.len(), 1) {
        return Err(Error::shape(format!("{} x 1", grid.len()), format!("{:?}", state0.dims())));
    }
    let (steps, dt) = cfg.steps();
    let mut stepper = MovingStepper::new(ops, params, dt, cfg.scheme, c)?;
    let norm = NormOps::line(ops.diffusion().clone(), &grid, params.eps);
    let every = ((cfg.diagnostic_interval / dt).round() as usize).max(1);
    let target = match freezing {
        Some(f) => Some(front_position(&state0.u1, 1, f.level, &grid)?),
        None => None,
    };
    let c_out = |s: &MovingStepper| freezing.map(|_| s.speed());
    let mut state = state0;
    let mut diags = vec![diag_row(0.0, &state, &grid, &norm, c_out(&stepper))];
    let mut rec = Recorder::new(cfg, &state);
    for k in 1..=steps {
        let t0 = (k - 1) as f64 * dt;
        let t1 = k as f64 * dt;
        let old = if rec.next < cfg.snapshot_times.len() { Some(state.clone()) } else { None };
        stepper.step(&mut state)?;
        if !state.is_finite() {
            return Err(Error::Divergence { step: k, t: t1 });
        }
        if let (Some(f), Some(x0)) = (freezing, target) {
            let x = front_position(&state.u1, 1, f.level, &grid)
                .map_err(|_| Error::FrontExistence(format!("front lost at t = {t1}")))?;
            stepper.set_speed((c + f.gain * (x - x0) / dt).max(0.0))?;
        }
        if let Some(old) = old {
            rec.advance(t0, &old, t1, &state);
        }
        if k % every == 0 || k == steps {
            diags.push(diag_row(t1, &state, &grid, &norm, c_out(&stepper)));
        }
    }
    Ok(Trajectory {
        times: rec.times,
        snapshots: rec.snaps,
        diagnostics: diags,
        final_time: steps as f64 * dt,
        final_state: state,
    })
}

/// Standard front-generating initial data `u1 = (1 - tanh((x - x_f)/w))/2`, `u2 = 0`.
pub fn step_initial_condition(grid: &Grid2D, x_f: f64, w: f64) -> Field {
    let profile: Vec<f64> = grid
        .axial()
        .nodes()
        .map(|x| 0.5 * (1.0 - ((x - x_f) / w).tanh()))
        .collect();
    let zeros = vec![0.0; grid.n()];
    Field::extend_axisymmetric(&profile, &zeros, grid.m()).expect("matching lengths")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angular_basis_is_orthonormal_and_diagonalizes() {
        let m = 8;
        let b = AngularBasis::new(m);
        for k in 0..m {
            for l in 0..m {
                let d: f64 = (0..m).map(|j| b.q[j * m + k] * b.q[j * m + l]).sum();
                assert!((d - if k == l { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        let a = crate::operators::angular_stencil(m);
        for k in 0..m {
            let v: Vec<f64> = (0..m).map(|j| b.q[j * m + k]).collect();
            let av = sparse::mul(&a, &v);
            for j in 0..m {
                assert!((av[j] - b.lambda[k] * v[j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn step_count_lands_on_t_end() {
        let c = ImexConfig::new(0.05, 180.0).unwrap();
        let (n, dt) = c.steps();
        assert_eq!(n, 3600);
        assert!((dt - 0.05).abs() < 1e-15);
        let c = ImexConfig::new(0.3, 1.0).unwrap();
        let (n, dt) = c.steps();
        assert_eq!(n, 4);
        assert!((n as f64 * dt - 1.0).abs() < 1e-15);
        assert!(ImexConfig::new(-1.0, 1.0).is_err());
        assert!(ImexConfig::new(0.1, 1.0).unwrap().with_snapshots(vec![0.5, 2.0]).is_err());
    }

    #[test]
    fn rest_state_is_preserved() {
        let g = Grid2D::new(Grid1D::new(32, 16.0).unwrap(), 4).unwrap();
        let prof = SurfaceProfile::pearls(0.8, 0.1, 16.0).unwrap();
        let p = ModelParams::fig1();
        let lap = assemble_laplace_beltrami(&prof, &g, &p, AxialScheme::Composed).unwrap();
        for scheme in [Scheme::ImexEuler, Scheme::Cnab2] {
            let mut st = StaticStepper::new(&lap, &p, 0.05, scheme).unwrap();
            let mut u = Field::zeros_like(&g);
            for _ in 0..100 {
                st.step(&mut u).unwrap();
            }
            assert!(u.u1.iter().chain(&u.u2).all(|v| *v == 0.0));
        }
    }
}
