//! Linearization about a front, per angular Fourier mode, and its spectrum.
//!
//! Blocks act on stacked vectors `[v1; v2]` of length `2N`. The inner product
//! is the eps-weighted trapezoid rule `<u, v> = sum w (u1 v1 + u2 v2 / eps)`.

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sprs::CsMat;

use crate::banded::{BandedLu, BandedMatrix};
use crate::error::{Error, Result};
use crate::front::FrontProfile;
use crate::grid::Field;
use crate::model::{decay_rate_eta, kinetics_f, kinetics_fpp, kinetics_fprime, nonlinear_remainder, rhs_moving, ModelParams};
use crate::norms::trapezoid_weights;
use crate::operators::MovingOps;
use crate::sparse;

pub const DENSE_CAP: usize = 4096;

#[derive(Debug, Clone)]
pub struct LinearBlock {
    pub n_mode: usize,
    pub matrix: CsMat<f64>,
    pub front_hash: String,
    pub params: ModelParams,
    /// Stacked quadrature weights (`w` for `v1`, `w / eps` for `v2`).
    pub weights: Vec<f64>,
    pub dx: f64,
}

impl LinearBlock {
    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        sparse::mul(&self.matrix, v)
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * x * y).sum()
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    fn inner_c(&self, a: &[c64], b: &[c64]) -> c64 {
        let mut s = c64::new(0.0, 0.0);
        for k in 0..a.len() {
            s += a[k] * b[k].conj() * self.weights[k];
        }
        s
    }

    /// Banded factorization of `matrix - sigma I` in interleaved ordering.
    fn shifted_lu(&self, sigma: f64, transpose: bool) -> Result<BandedLu> {
        let n = self.size() / 2;
        let map = |k: usize| if k < n { 2 * k } else { 2 * (k - n) + 1 };
        let mat = if transpose { sparse::transpose(&self.matrix) } else { self.matrix.clone() };
        let mut entries = Vec::with_capacity(mat.nnz());
        for (i, j, v) in sparse::triplets(&mat, 1.0) {
            entries.push((map(i), map(j), v));
        }
        for k in 0..2 * n {
            entries.push((k, k, -sigma));
        }
        let inter = sparse::from_triplets(2 * n, 2 * n, &entries);
        let b: BandedMatrix = sparse::to_banded(&inter);
        b.factor()
    }
}

fn stacked_weights(front: &FrontProfile) -> Vec<f64> {
    let w = trapezoid_weights(&front.grid);
    let eps = front.params.eps;
    w.iter().cloned().chain(w.iter().map(|x| x / eps)).collect()
}

/// `L_n = [[D(d_z^2 - n^2/R^2) + c d_z + f'(phi1)/Cm, -1/Cm], [eps, c d_z - eps gamma]]`.
pub fn assemble_ln(front: &FrontProfile, n_mode: usize, p: &ModelParams) -> LinearBlock {
    let ops: MovingOps = MovingOps::compact(front.grid, p.diffusivity());
    let n = front.grid.len();
    let c = front.c;
    let shift = p.diffusivity() * (n_mode * n_mode) as f64 / (p.radius * p.radius);
    let mut e = sparse::triplets(ops.diffusion(), 1.0);
    e.extend(sparse::triplets(ops.dz(), c));
    for (i, j, v) in sparse::triplets(ops.dz_inflow(), c) {
        e.push((n + i, n + j, v));
    }
    for i in 0..n {
        e.push((i, i, kinetics_fprime(front.phi1[i], p.alpha) / p.cm - shift));
        e.push((i, n + i, -1.0 / p.cm));
        e.push((n + i, i, p.eps));
        e.push((n + i, n + i, -p.eps * p.gamma));
    }
    LinearBlock {
        n_mode,
        matrix: sparse::from_triplets(2 * n, 2 * n, &e),
        front_hash: front.fingerprint(),
        params: *p,
        weights: stacked_weights(front),
        dx: front.grid.dx(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenpair {
    pub lambda: c64,
    pub localized: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub n_mode: usize,
    /// Sorted by real part, descending.
    pub eigenvalues: Vec<Eigenpair>,
    /// Index of the eigenvalue nearest the origin (mode 0 only).
    pub zero_index: Option<usize>,
    /// `-max Re` over eigenvalues other than the zero mode.
    pub gap: f64,
    pub eta: f64,
    pub eta_prime: Option<f64>,
    pub window: f64,
}

impl SpectrumReport {
    pub fn zero_eigenvalue(&self) -> Option<c64> {
        self.zero_index.map(|k| self.eigenvalues[k].lambda)
    }

    pub fn max_real(&self) -> f64 {
        self.eigenvalues.first().map_or(f64::NEG_INFINITY, |e| e.lambda.re)
    }

    /// Eigenvalues with `|lambda| <= r`.
    pub fn count_within(&self, r: f64) -> usize {
        self.eigenvalues.iter().filter(|e| e.lambda.norm() <= r).count()
    }

    /// Magnitude of the smallest eigenvalue other than the zero mode.
    pub fn next_magnitude(&self) -> f64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(k, _)| Some(*k) != self.zero_index)
            .map(|(_, e)| e.lambda.norm())
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Keep eigenvalues with `Re >= -window`.
    pub window: f64,
    /// Compute eigenvectors to label localized modes.
    pub label_modes: bool,
    pub cap: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            window: f64::INFINITY,
            label_modes: false,
            cap: DENSE_CAP,
        }
    }
}

/// Participation ratio `(sum |v|^2)^2 / (n sum |v|^4)`; near 1 for spread-out vectors.
pub fn participation_ratio(v: &[c64]) -> f64 {
    let s2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let s4: f64 = v.iter().map(|z| z.norm_sqr().powi(2)).sum();
    if s4 == 0.0 {
        return 0.0;
    }
    s2 * s2 / (v.len() as f64 * s4)
}

/// Dense eigensolve of a block.
pub fn spectrum_block(block: &LinearBlock, opts: &SpectrumOptions) -> Result<SpectrumReport> {
    let size = block.size();
    if size > opts.cap {
        return Err(Error::TooLarge { size, cap: opts.cap });
    }
    let dense = sparse::to_dense(&block.matrix);
    let mut pairs: Vec<Eigenpair> = if opts.label_modes {
        let evd = dense.eigen().map_err(|e| Error::Solver(format!("{e:?}")))?;
        let s = evd.S();
        let u = evd.U();
        (0..size)
            .map(|k| {
                let v: Vec<c64> = (0..size).map(|i| u[(i, k)]).collect();
                Eigenpair {
                    lambda: s[k],
                    localized: Some(participation_ratio(&v) <= 0.5),
                }
            })
            .collect()
    } else {
        dense
            .eigenvalues()
            .map_err(|e| Error::Solver(format!("{e:?}")))?
            .into_iter()
            .map(|lambda| Eigenpair { lambda, localized: None })
            .collect()
    };
    pairs.retain(|e| e.lambda.re >= -opts.window);
    pairs.sort_by(|a, b| b.lambda.re.total_cmp(&a.lambda.re));
    let zero_index = (block.n_mode == 0 && !pairs.is_empty()).then(|| {
        pairs
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.lambda.norm().total_cmp(&b.1.lambda.norm()))
            .map(|(k, _)| k)
            .unwrap()
    });
    let top = pairs
        .iter()
        .enumerate()
        .filter(|(k, _)| Some(*k) != zero_index)
        .map(|(_, e)| e.lambda.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let eta = decay_rate_eta(&block.params);
    let gap = -top;
    Ok(SpectrumReport {
        n_mode: block.n_mode,
        eigenvalues: pairs,
        zero_index,
        gap,
        eta,
        eta_prime: (block.n_mode == 0 && gap > 0.0).then(|| eta.min(gap)),
        window: opts.window,
    })
}

fn inverse_iteration(block: &LinearBlock, transpose: bool, start: &[f64], iters: usize) -> Result<Vec<f64>> {
    let n = block.size() / 2;
    let lu = block.shifted_lu(0.0, transpose)?;
    let mut x = start.to_vec();
    for _ in 0..iters {
        let mut y = vec![0.0; 2 * n];
        for i in 0..n {
            y[2 * i] = x[i];
            y[2 * i + 1] = x[n + i];
        }
        lu.solve_in_place(&mut y);
        let scale = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Solver("inverse iteration broke down".into()));
        }
        for i in 0..n {
            x[i] = y[2 * i] / scale;
            x[n + i] = y[2 * i + 1] / scale;
        }
    }
    Ok(x)
}

/// Near-kernel vector of the mode-0 block by inverse iteration from `tau`,
/// scaled to have the same norm and orientation as `tau`.
pub fn zero_mode(block: &LinearBlock, tau: &[f64]) -> Result<Vec<f64>> {
    let mut x = inverse_iteration(block, false, tau, 3)?;
    let s = block.inner(&x, tau);
    let k = block.norm(tau) / block.norm(&x) * s.signum();
    x.iter_mut().for_each(|v| *v *= k);
    Ok(x)
}

/// Rayleigh quotient `<L x, x> / <x, x>`.
pub fn rayleigh(block: &LinearBlock, x: &[f64]) -> f64 {
    block.inner(&block.apply(x), x) / block.inner(x, x)
}

/// Kernel vector of the adjoint `W^-1 L^T W`, normalized so `<tau, tau*> = 1`.
pub fn adjoint_zero_mode(block: &LinearBlock, tau: &[f64]) -> Result<Vec<f64>> {
    if block.n_mode != 0 {
        return Err(Error::invalid("block", "adjoint zero mode needs the n = 0 block"));
    }
    let start: Vec<f64> = tau.iter().zip(&block.weights).map(|(t, w)| t * w).collect();
    let y = inverse_iteration(block, true, &start, 3)?;
    let mut ts: Vec<f64> = y.iter().zip(&block.weights).map(|(v, w)| v / w).collect();
    let unit = block.norm(&ts);
    ts.iter_mut().for_each(|v| *v /= unit);
    let pairing = block.inner(tau, &ts) / block.norm(tau);
    if pairing.abs() < 1e-8 {
        return Err(Error::Degenerate(format!("<tau, tau*> = {pairing:e} before scaling")));
    }
    let s = block.inner(tau, &ts);
    ts.iter_mut().for_each(|v| *v /= s);
    Ok(ts)
}

/// Adjoint of a block under its weighted inner product, `W^-1 L^T W`.
pub fn weighted_adjoint(block: &LinearBlock) -> CsMat<f64> {
    let w = &block.weights;
    let e: Vec<_> = sparse::triplets(&block.matrix, 1.0)
        .into_iter()
        .map(|(i, j, v)| (j, i, v * w[i] / w[j]))
        .collect();
    sparse::from_triplets(block.size(), block.size(), &e)
}

/// Rank-one spectral projection `P v = <v, tau*> tau`.
#[derive(Debug, Clone)]
pub struct RieszProjection {
    pub tau: Vec<f64>,
    pub tau_star: Vec<f64>,
    weights: Vec<f64>,
}

impl RieszProjection {
    pub fn new(block: &LinearBlock, tau: Vec<f64>, tau_star: Vec<f64>) -> Self {
        RieszProjection {
            tau,
            tau_star,
            weights: block.weights.clone(),
        }
    }

    pub fn coefficient(&self, v: &[f64]) -> f64 {
        v.iter()
            .zip(&self.tau_star)
            .zip(&self.weights)
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        riesz_projection_apply(v, &self.tau, &self.tau_star, &self.weights)
    }

    /// `Q v = v - P v`.
    pub fn complement(&self, v: &[f64]) -> Vec<f64> {
        let p = self.apply(v);
        v.iter().zip(p).map(|(a, b)| a - b).collect()
    }
}

pub fn riesz_projection_apply(v: &[f64], tau: &[f64], tau_star: &[f64], weights: &[f64]) -> Vec<f64> {
    let k: f64 = v.iter().zip(tau_star).zip(weights).map(|((a, b), w)| a * b * w).sum();
    tau.iter().map(|t| k * t).collect()
}

/// Far-field states of the front: `Plus` is `z -> +inf` (rest, `phi1 = 0`),
/// `Minus` is `z -> -inf` (excited, `phi1 = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

pub fn branch_limit(branch: Branch) -> f64 {
    match branch {
        Branch::Plus => 0.0,
        Branch::Minus => 1.0,
    }
}

/// `m(k, n) = [[-D(k^2 + n^2/R^2) + i c k + f'/Cm, -1/Cm], [eps, i c k - eps gamma]]`.
///
/// `c` is the front speed; the closed form below omits it (`c = 0`) unless supplied.
pub fn multiplier_matrix(k: f64, n: usize, branch: Branch, p: &ModelParams, c: f64) -> [[c64; 2]; 2] {
    let d = p.diffusivity();
    let fp = kinetics_fprime(branch_limit(branch), p.alpha);
    let ick = c64::new(0.0, c * k);
    let a = c64::new(-d * (k * k + (n * n) as f64 / (p.radius * p.radius)) + fp / p.cm, 0.0) + ick;
    [
        [a, c64::new(-1.0 / p.cm, 0.0)],
        [c64::new(p.eps, 0.0), ick - c64::new(p.eps * p.gamma, 0.0)],
    ]
}

/// Both roots of the characteristic polynomial of a 2x2 matrix.
pub fn eigenvalues_2x2(m: &[[c64; 2]; 2]) -> [c64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr - det * 4.0).sqrt();
    [(tr + disc) * 0.5, (tr - disc) * 0.5]
}

/// Closed form `lambda(k, 0) = i c k - (Dk^2 - f'/Cm + eps gamma -+ sqrt((Dk^2 - f'/Cm - eps gamma)^2 - 4 eps/Cm)) / 2`.
pub fn essential_branch_lambda(k: f64, branch: Branch, p: &ModelParams, c: f64) -> [c64; 2] {
    let d = p.diffusivity();
    let fp = kinetics_fprime(branch_limit(branch), p.alpha) / p.cm;
    let a = d * k * k - fp;
    let b = p.eps * p.gamma;
    let disc = c64::new((a - b) * (a - b) - 4.0 * p.eps / p.cm, 0.0).sqrt();
    let ick = c64::new(0.0, c * k);
    let s = c64::new(a + b, 0.0);
    [ick - (s - disc) * 0.5, ick - (s + disc) * 0.5]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeReport {
    pub samples: usize,
    pub max_rayleigh: f64,
    pub bound: f64,
    pub violations: usize,
}

/// `Re <L v, v> / ||v||^2` over random complex vectors, against `bound`.
pub fn dissipativity_probe(block: &LinearBlock, samples: usize, bound: f64, seed: u64) -> ProbeReport {
    dissipativity_probe_with(block, samples, bound, seed, |v| v)
}

/// As [`dissipativity_probe`], with each sample passed through `map` first (e.g. a projection).
pub fn dissipativity_probe_with(
    block: &LinearBlock,
    samples: usize,
    bound: f64,
    seed: u64,
    map: impl Fn(Vec<c64>) -> Vec<c64>,
) -> ProbeReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = block.size();
    let mut max_r = f64::NEG_INFINITY;
    let mut violations = 0;
    for _ in 0..samples {
        let raw: Vec<c64> = (0..size)
            .map(|k| {
                // u2 entries scaled so both components carry comparable weighted energy
                let s = block.weights[k].recip().sqrt();
                c64::new(rng.random_range(-1.0..1.0) * s, rng.random_range(-1.0..1.0) * s)
            })
            .collect();
        let v = map(raw);
        let r = complex_rayleigh(block, &v);
        if r > bound {
            violations += 1;
        }
        max_r = max_r.max(r);
    }
    ProbeReport {
        samples,
        max_rayleigh: max_r,
        bound,
        violations,
    }
}

pub fn complex_rayleigh(block: &LinearBlock, v: &[c64]) -> f64 {
    let re: Vec<f64> = v.iter().map(|z| z.re).collect();
    let im: Vec<f64> = v.iter().map(|z| z.im).collect();
    let lr = block.apply(&re);
    let li = block.apply(&im);
    let lv: Vec<c64> = lr.iter().zip(&li).map(|(a, b)| c64::new(*a, *b)).collect();
    block.inner_c(&lv, v).re / block.inner_c(v, v).re
}

/// `10 dx^2 sup |f''(phi1)|` along the front.
pub fn tol_disc(front: &FrontProfile) -> f64 {
    let dx = front.grid.dx();
    let sup = front
        .phi1
        .iter()
        .map(|&u| kinetics_fpp(u, front.params.alpha).abs())
        .fold(0.0, f64::max);
    10.0 * dx * dx * sup
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorReport {
    pub hs: Vec<f64>,
    pub remainders: Vec<f64>,
    /// Least-squares slope of `log remainder` against `log h`.
    pub order: f64,
    /// `||F(Phi + v) - F(Phi) - L v - N(v)|| / ||F(Phi + v)||`.
    pub identity_residual: f64,
}

fn stacked(f: &Field) -> Vec<f64> {
    f.to_stacked()
}

/// Taylor ladder of the co-moving residual about the front in direction `v`.
pub fn taylor_remainder_check(front: &FrontProfile, v: &Field, hs: &[f64]) -> Result<TaylorReport> {
    let p = front.params;
    let ops = front.ops();
    let block = assemble_ln(front, 0, &p);
    let phi = front.field();
    let f0 = stacked(&rhs_moving(&phi, front.c, &ops, &p)?);
    let lv = block.apply(&stacked(v));
    let mut remainders = Vec::with_capacity(hs.len());
    for &h in hs {
        let mut u = phi.clone();
        u.axpy(h, v);
        let fu = stacked(&rhs_moving(&u, front.c, &ops, &p)?);
        let r: Vec<f64> = (0..fu.len()).map(|k| fu[k] - f0[k] - h * lv[k]).collect();
        remainders.push(block.norm(&r));
    }
    let lx: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = remainders.iter().map(|r| r.max(1e-300).ln()).collect();
    let order = if hs.len() >= 2 { slope(&lx, &ly) } else { f64::NAN };

    let mut u = phi.clone();
    u.axpy(1.0, v);
    let fu = stacked(&rhs_moving(&u, front.c, &ops, &p)?);
    let nv = stacked(&nonlinear_remainder(v, &front.phi1, &p)?);
    let r: Vec<f64> = (0..fu.len()).map(|k| fu[k] - f0[k] - lv[k] - nv[k]).collect();
    let identity_residual = block.norm(&r) / block.norm(&fu).max(f64::MIN_POSITIVE);
    Ok(TaylorReport {
        hs: hs.to_vec(),
        remainders,
        order,
        identity_residual,
    })
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    sxy / sxx
}

/// Eigenvalues of a small dense real matrix.
pub fn dense_eigenvalues(a: &Mat<f64>) -> Result<Vec<c64>> {
    a.eigenvalues().map_err(|e| Error::Solver(format!("{e:?}")))
}

/// Pointwise kinetics `f(u)/Cm` (convenience for oracles).
pub fn kinetics_scaled(u: f64, p: &ModelParams) -> f64 {
    kinetics_f(u, p.alpha) / p.cm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_pair_at_k0() {
        let p = ModelParams::fig1();
        let m = multiplier_matrix(0.0, 0, Branch::Plus, &p, 0.0);
        let ev = eigenvalues_2x2(&m);
        for z in ev {
            assert!((z.re + 0.00535).abs() < 1e-6);
            assert!((z.im.abs() - 0.0088530).abs() < 1e-6);
        }
        let cf = essential_branch_lambda(0.0, Branch::Plus, &p, 0.0);
        let mut a = ev.to_vec();
        let mut b = cf.to_vec();
        a.sort_by(|x, y| x.im.total_cmp(&y.im));
        b.sort_by(|x, y| x.im.total_cmp(&y.im));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn participation_extremes() {
        let flat = vec![c64::new(1.0, 0.0); 100];
        assert!((participation_ratio(&flat) - 1.0).abs() < 1e-12);
        let mut spike = vec![c64::new(0.0, 0.0); 100];
        spike[3] = c64::new(1.0, 0.0);
        assert!((participation_ratio(&spike) - 0.01).abs() < 1e-12);
    }
}
