//! Traveling-front profiles: computation, tracking and distance to the family of translates.

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D, Grid2D};
use crate::model::{kinetics_fprime, rhs_moving, ModelParams};
use crate::norms::{sample_cubic, trapezoid_weights, NormOps};
use crate::operators::MovingOps;
use crate::sparse;
use crate::timestepper::{interleaved_system, MovingStepper, Scheme};

/// `u1 = (1 - tanh((z - x_f)/w))/2`, `u2 = 0.02 u1`.
pub fn initial_front_guess(grid: &Grid1D, x_f: f64, w: f64) -> Result<Field> {
    if !(x_f > grid.first() && x_f < grid.last()) {
        return Err(Error::invalid("x_f", format!("{x_f} lies outside the grid")));
    }
    if !(w > 0.0) {
        return Err(Error::invalid("w", "width must be positive"));
    }
    let u1: Vec<f64> = grid.nodes().map(|z| 0.5 * (1.0 - ((z - x_f) / w).tanh())).collect();
    let u2 = u1.iter().map(|v| 0.02 * v).collect();
    Field::from_1d(u1, u2)
}

/// Largest `x` where the (angular mean of) `u1` crosses `level` downward.
pub fn front_position(u1: &[f64], m: usize, level: f64, grid: &Grid1D) -> Result<f64> {
    let mean;
    let v: &[f64] = if m > 1 {
        mean = Field::angular_mean(u1, m);
        &mean
    } else {
        u1
    };
    if v.len() != grid.len() {
        return Err(Error::shape(grid.len(), v.len()));
    }
    for i in (0..v.len() - 1).rev() {
        let (a, b) = (v[i], v[i + 1]);
        if a >= level && b < level {
            return Ok(grid.node(i) + (a - level) / (a - b) * grid.dx());
        }
    }
    Err(Error::NotFound { level })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedFit {
    pub speed: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares slope of `positions` against `times`.
pub fn measure_speed(times: &[f64], positions: &[f64]) -> Result<SpeedFit> {
    if times.len() != positions.len() {
        return Err(Error::shape(times.len(), positions.len()));
    }
    if times.len() < 3 {
        return Err(Error::Degenerate(format!("need at least 3 samples, got {}", times.len())));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Degenerate("times must be strictly increasing".into()));
    }
    let n = times.len() as f64;
    let tm = times.iter().sum::<f64>() / n;
    let xm = positions.iter().sum::<f64>() / n;
    let stt: f64 = times.iter().map(|t| (t - tm).powi(2)).sum();
    let stx: f64 = times.iter().zip(positions).map(|(t, x)| (t - tm) * (x - xm)).sum();
    let sxx: f64 = positions.iter().map(|x| (x - xm).powi(2)).sum();
    let speed = stx / stt;
    let intercept = xm - speed * tm;
    let r_squared = if sxx == 0.0 { 1.0 } else { stx * stx / (stt * sxx) };
    Ok(SpeedFit {
        speed,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontOptions {
    /// Initial front location in co-moving coordinates.
    pub x_f: f64,
    pub width: f64,
    /// Starting speed; `None` uses the scalar bistable estimate `sqrt(D/2)(1 - 2 alpha)`.
    pub c_guess: Option<f64>,
    pub dt: f64,
    pub freeze_gain: f64,
    pub freeze_tol: f64,
    pub freeze_window: usize,
    pub freeze_max_time: f64,
    /// Newton stops when the residual drops below this fraction of `||Phi||_{2,1}`.
    pub newton_rtol: f64,
    pub newton_max_iter: usize,
}

impl Default for FrontOptions {
    fn default() -> Self {
        FrontOptions {
            x_f: 0.0,
            width: 5.0,
            c_guess: None,
            dt: 0.05,
            freeze_gain: 0.5,
            freeze_tol: 1e-6,
            freeze_window: 100,
            freeze_max_time: 300.0,
            newton_rtol: 1e-10,
            newton_max_iter: 25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FrontProfile {
    pub grid: Grid1D,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    pub c: f64,
    /// eps-weighted norm of the co-moving residual.
    pub residual: f64,
    /// True when the Newton stage converged.
    pub refined: bool,
    /// Speed reached by the freezing stage.
    pub freeze_speed: f64,
    pub newton_iterations: usize,
    pub params: ModelParams,
}

impl FrontProfile {
    pub fn field(&self) -> Field {
        Field::from_1d(self.phi1.clone(), self.phi2.clone()).expect("matching lengths")
    }

    pub fn position(&self) -> Result<f64> {
        front_position(&self.phi1, 1, 0.5, &self.grid)
    }

    /// Operators of the co-moving system this profile solves.
    pub fn ops(&self) -> MovingOps {
        MovingOps::compact(self.grid, self.params.diffusivity())
    }

    /// Translation generator `tau = -d_z Phi` (centered differences).
    pub fn tangent(&self) -> Field {
        let d = crate::operators::first_difference(&self.grid, crate::operators::Closure::SecondOrder);
        let t1 = sparse::mul(&d, &self.phi1).into_iter().map(|v| -v).collect();
        let t2 = sparse::mul(&d, &self.phi2).into_iter().map(|v| -v).collect();
        Field::from_1d(t1, t2).expect("matching lengths")
    }

    /// `||Phi||_{2,1}` in the co-moving norm.
    pub fn norm_h21(&self) -> f64 {
        self.norm_ops().h21(&self.field())
    }

    pub fn norm_ops(&self) -> NormOps {
        NormOps::line(self.ops().diffusion().clone(), &self.grid, self.params.eps)
    }

    /// Short hash of grid, speed and profile values.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.grid.len() as u64).to_le_bytes());
        for v in [self.grid.origin(), self.grid.length(), self.c] {
            h.update(v.to_le_bytes());
        }
        for v in self.phi1.iter().chain(&self.phi2) {
            h.update(v.to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }
}

fn residual_norm(ops: &MovingOps, norm: &NormOps, u: &Field, c: f64, p: &ModelParams) -> Result<f64> {
    Ok(norm.norm(&rhs_moving(u, c, ops, p)?))
}

/// Freezing evolution followed by Newton on `(Phi, c)` with a phase condition.
pub fn compute_front(p: &ModelParams, grid: &Grid1D, opts: &FrontOptions) -> Result<FrontProfile> {
    let ops = MovingOps::compact(*grid, p.diffusivity());
    let norm = NormOps::line(ops.diffusion().clone(), grid, p.eps);
    let c0 = opts
        .c_guess
        .unwrap_or_else(|| (p.diffusivity() / 2.0).sqrt() * (1.0 - 2.0 * p.alpha));

    // stage 1: freezing
    let mut u = initial_front_guess(grid, opts.x_f, opts.width)?;
    let target = front_position(&u.u1, 1, 0.5, grid)?;
    let mut stepper = MovingStepper::new(&ops, p, opts.dt, Scheme::Cnab2, c0)?;
    let max_steps = (opts.freeze_max_time / opts.dt).ceil() as usize;
    let mut history = Vec::with_capacity(max_steps);
    for _ in 0..max_steps {
        stepper.step(&mut u)?;
        if !u.is_finite() {
            return Err(Error::FrontExistence("state diverged during freezing".into()));
        }
        let x = front_position(&u.u1, 1, 0.5, grid)
            .map_err(|_| Error::FrontExistence("u1 collapsed below the tracking level".into()))?;
        let c = (c0 + opts.freeze_gain * (x - target) / opts.dt).max(0.0);
        stepper.set_speed(c)?;
        history.push(c);
        let k = history.len();
        if k > opts.freeze_window && (history[k - 1] - history[k - 1 - opts.freeze_window]).abs() < opts.freeze_tol {
            break;
        }
    }
    let c_freeze = stepper.speed();
    if u.u1.iter().cloned().fold(f64::NEG_INFINITY, f64::max) < 0.5 {
        return Err(Error::FrontExistence("no excited region remains".into()));
    }

    // stage 2: bordered Newton
    let reference = u.clone();
    let w = trapezoid_weights(grid);
    let dref = sparse::mul(ops.dz(), &reference.u1);
    let phase_row: Vec<f64> = w.iter().zip(&dref).map(|(a, b)| a * b).collect();
    let phi_norm = norm.h21(&reference);
    let tol = opts.newton_rtol * phi_norm;
    let n = grid.len();
    let mut c = c_freeze;
    let mut res = residual_norm(&ops, &norm, &u, c, p)?;
    let mut iterations = 0;
    let mut converged = res <= tol;
    while !converged && iterations < opts.newton_max_iter {
        iterations += 1;
        let f = rhs_moving(&u, c, &ops, p)?;
        let fp: Vec<f64> = u.u1.iter().map(|&v| kinetics_fprime(v, p.alpha) / p.cm).collect();
        let jac: BandedMatrix = interleaved_system(&ops, c, p, Some(&fp), 0.0, 1.0);
        let lu = jac.factor()?;
        let mut y1 = vec![0.0; 2 * n];
        let mut y2 = vec![0.0; 2 * n];
        let dc1 = sparse::mul(ops.dz(), &u.u1);
        let dc2 = sparse::mul(ops.dz_inflow(), &u.u2);
        for i in 0..n {
            y1[2 * i] = -f.u1[i];
            y1[2 * i + 1] = -f.u2[i];
            y2[2 * i] = dc1[i];
            y2[2 * i + 1] = dc2[i];
        }
        lu.solve_in_place(&mut y1);
        lu.solve_in_place(&mut y2);
        let g: f64 = (0..n).map(|i| phase_row[i] * (u.u1[i] - reference.u1[i])).sum();
        let ry1: f64 = (0..n).map(|i| phase_row[i] * y1[2 * i]).sum();
        let ry2: f64 = (0..n).map(|i| phase_row[i] * y2[2 * i]).sum();
        if ry2.abs() < 1e-300 {
            break;
        }
        let dc = (ry1 + g) / ry2;
        let mut trial = u.clone();
        for i in 0..n {
            trial.u1[i] += y1[2 * i] - dc * y2[2 * i];
            trial.u2[i] += y1[2 * i + 1] - dc * y2[2 * i + 1];
        }
        let trial_c = c + dc;
        let trial_res = residual_norm(&ops, &norm, &trial, trial_c, p)?;
        if !trial_res.is_finite() || trial_res > 10.0 * res.max(tol) {
            break;
        }
        u = trial;
        c = trial_c;
        res = trial_res;
        converged = res <= tol;
    }
    if !converged {
        u = reference;
        c = c_freeze;
        res = residual_norm(&ops, &norm, &u, c, p)?;
    }
    if !(c > 0.0) {
        return Err(Error::FrontExistence(format!("non-positive speed {c}")));
    }
    Ok(FrontProfile {
        grid: *grid,
        phi1: u.u1,
        phi2: u.u2,
        c,
        residual: res,
        refined: converged,
        freeze_speed: c_freeze,
        newton_iterations: iterations,
        params: *p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceOptions {
    /// Distance from each end of the front grid excluded from the comparison window.
    pub margin: f64,
    /// Half width of the coarse scan around the position-based estimate.
    pub scan_half_width: f64,
    /// Golden-section tolerance as a fraction of `dx`.
    pub rel_tol: f64,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions {
            margin: 20.0,
            scan_half_width: 25.0,
            rel_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub distance: f64,
    pub h_star: f64,
    /// The minimizer sits on the edge of the scan window.
    pub at_window_edge: bool,
}

/// `Phi(x - h)` on `grid`, extended to every angular node.
pub fn manifold_member(front: &FrontProfile, grid: &Grid2D, h: f64) -> Field {
    let one = |v: &[f64]| -> Vec<f64> {
        grid.axial()
            .nodes()
            .map(|x| sample_cubic(v, &front.grid, x - h))
            .collect()
    };
    Field::extend_axisymmetric(&one(&front.phi1), &one(&front.phi2), grid.m()).expect("matching lengths")
}

/// `||u - Phi_h||_{2,1}` on the window where `Phi_h` is backed by front data.
pub fn distance_at(u: &Field, front: &FrontProfile, grid: &Grid2D, norm: &NormOps, h: f64, margin: f64) -> f64 {
    let lo = front.grid.first() + margin + h;
    let hi = front.grid.last() - margin + h;
    let axial = *grid.axial();
    let masked = norm.with_weights(norm.weights().masked(|i| {
        let x = axial.node(i);
        x >= lo && x <= hi
    }));
    let diff = u.sub(&manifold_member(front, grid, h));
    masked.h21(&diff)
}

/// `inf_h ||u - Phi_h||_{2,1}`: coarse scan with step `dx`, then golden-section refinement.
pub fn dist_to_manifold(
    u: &Field,
    front: &FrontProfile,
    grid: &Grid2D,
    norm: &NormOps,
    opts: &DistanceOptions,
) -> Result<Distance> {
    u.check_grid(grid)?;
    let dx = grid.axial().dx();
    let center = match (front_position(&u.u1, u.m(), 0.5, grid.axial()), front.position()) {
        (Ok(a), Ok(b)) => a - b,
        _ => 0.0,
    };
    let f = |h: f64| distance_at(u, front, grid, norm, h, opts.margin);
    let k = (opts.scan_half_width / dx).ceil() as i64;
    let mut best = (f64::INFINITY, center, 0i64);
    for s in -k..=k {
        let h = center + s as f64 * dx;
        let v = f(h);
        if v < best.0 {
            best = (v, h, s);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::Degenerate("distance is not finite".into()));
    }
    let (mut a, mut b) = (best.1 - dx, best.1 + dx);
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - gr * (b - a);
    let mut x2 = a + gr * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > opts.rel_tol * dx {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    let h = 0.5 * (a + b);
    let v = f(h);
    let (distance, h_star) = if v <= best.0 { (v, h) } else { (best.0, best.1) };
    Ok(Distance {
        distance,
        h_star,
        at_window_edge: best.2.abs() == k,
    })
}
