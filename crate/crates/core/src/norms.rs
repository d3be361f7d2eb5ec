//! Quadrature, the eps-weighted inner product, the mixed H^2 x H^1 norm and translates.

use sprs::CsMat;

use crate::error::{Error, Result};
use crate::geometry::SurfaceProfile;
use crate::grid::{Field, Grid1D, Grid2D};
use crate::operators::{first_difference, AssembledOperator, Closure};
use crate::sparse;

/// Trapezoid weights over the axial nodes.
pub fn trapezoid_weights(grid: &Grid1D) -> Vec<f64> {
    let n = grid.len();
    let h = grid.dx();
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

/// Per-node quadrature weights of the surface measure `sqrt(g) dtheta dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureWeights {
    n: usize,
    m: usize,
    weights: Vec<f64>,
}

impl QuadratureWeights {
    /// Trapezoid in `x`, uniform sum in `theta`, times `sqrt(g)` of the profile.
    pub fn surface(profile: &SurfaceProfile, grid: &Grid2D) -> Result<Self> {
        let axial = trapezoid_weights(grid.axial());
        let dth = grid.dtheta();
        let mut weights = Vec::with_capacity(grid.size());
        for (i, x) in grid.axial().nodes().enumerate() {
            let sg = profile.metric(x)?.g.sqrt();
            for _ in 0..grid.m() {
                weights.push(axial[i] * dth * sg);
            }
        }
        Ok(QuadratureWeights {
            n: grid.n(),
            m: grid.m(),
            weights,
        })
    }

    /// Plain trapezoid weights for data on a line.
    pub fn line(grid: &Grid1D) -> Self {
        QuadratureWeights {
            n: grid.len(),
            m: 1,
            weights: trapezoid_weights(grid),
        }
    }

    /// Zeroes the weights of axial nodes where `keep(i)` is false.
    pub fn masked(&self, keep: impl Fn(usize) -> bool) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            if !keep(i) {
                out.weights[i * self.m..(i + 1) * self.m].fill(0.0);
            }
        }
        out
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `sum w (u1 v1 + eps^-1 u2 v2)`.
pub fn weighted_inner(u: &Field, v: &Field, w: &QuadratureWeights, eps: f64) -> Result<f64> {
    u.check_same_shape(v)?;
    if u.dims() != w.dims() {
        return Err(Error::shape(format!("{:?}", w.dims()), format!("{:?}", u.dims())));
    }
    Ok(inner_parts(&u.u1, &u.u2, &v.u1, &v.u2, w.as_slice(), eps))
}

pub(crate) fn inner_parts(a1: &[f64], a2: &[f64], b1: &[f64], b2: &[f64], w: &[f64], eps: f64) -> f64 {
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for k in 0..w.len() {
        s1 += w[k] * a1[k] * b1[k];
        s2 += w[k] * a2[k] * b2[k];
    }
    s1 + s2 / eps
}

pub fn weighted_norm(u: &Field, w: &QuadratureWeights, eps: f64) -> Result<f64> {
    Ok(weighted_inner(u, u, w, eps)?.max(0.0).sqrt())
}

/// Operators and weights defining `||u||_{2,1} = ||(lap u1, d_x u2)|| + ||u||`.
#[derive(Debug, Clone)]
pub struct NormOps {
    lap: CsMat<f64>,
    dx: CsMat<f64>,
    weights: QuadratureWeights,
    eps: f64,
}

impl NormOps {
    pub fn new(lap: &AssembledOperator, grid: &Grid2D, weights: QuadratureWeights, eps: f64) -> Result<Self> {
        if lap.n() != grid.n() || lap.m() != grid.m() || weights.dims() != (grid.n(), grid.m()) {
            return Err(Error::shape(
                format!("{} x {}", grid.n(), grid.m()),
                format!("{} x {}", lap.n(), lap.m()),
            ));
        }
        let d1 = first_difference(grid.axial(), Closure::SecondOrder);
        Ok(NormOps {
            lap: lap.matrix().clone(),
            dx: sparse::kron_identity_right(&d1, grid.m()),
            weights,
            eps,
        })
    }

    /// Norm operators on a line, with `lap` acting on the 1D data directly.
    pub fn line(lap: CsMat<f64>, grid: &Grid1D, eps: f64) -> Self {
        NormOps {
            lap,
            dx: first_difference(grid, Closure::SecondOrder),
            weights: QuadratureWeights::line(grid),
            eps,
        }
    }

    pub fn with_weights(&self, weights: QuadratureWeights) -> Self {
        NormOps {
            weights,
            ..self.clone()
        }
    }

    pub fn weights(&self) -> &QuadratureWeights {
        &self.weights
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn norm(&self, u: &Field) -> f64 {
        inner_parts(&u.u1, &u.u2, &u.u1, &u.u2, self.weights.as_slice(), self.eps)
            .max(0.0)
            .sqrt()
    }

    pub fn h21(&self, u: &Field) -> f64 {
        let a = sparse::mul(&self.lap, &u.u1);
        let b = sparse::mul(&self.dx, &u.u2);
        let w = self.weights.as_slice();
        let top = inner_parts(&a, &b, &a, &b, w, self.eps).max(0.0).sqrt();
        top + self.norm(u)
    }
}

/// Value at `x` of the cubic Lagrange interpolant through the nearest four nodes.
/// Positions outside the grid take the boundary value.
pub fn sample_cubic(values: &[f64], grid: &Grid1D, x: f64) -> f64 {
    let n = values.len();
    let s = (x - grid.origin()) / grid.dx();
    if s <= 0.0 {
        return values[0];
    }
    if s >= (n - 1) as f64 {
        return values[n - 1];
    }
    let k = s.floor() as usize;
    let k0 = k.saturating_sub(1).min(n - 4);
    let t = s - k0 as f64;
    let (y0, y1, y2, y3) = (values[k0], values[k0 + 1], values[k0 + 2], values[k0 + 3]);
    let (a, b, c, d) = (t, t - 1.0, t - 2.0, t - 3.0);
    -y0 * b * c * d / 6.0 + y1 * a * c * d / 2.0 - y2 * a * b * d / 2.0 + y3 * a * b * c / 6.0
}

/// Translate `u(x - h, theta)` by cubic interpolation along `x`, clamped at the ends.
pub fn shift_field(u: &Field, h: f64, grid: &Grid1D) -> Result<Field> {
    if u.n() != grid.len() {
        return Err(Error::shape(grid.len(), u.n()));
    }
    if h.abs() >= grid.length() {
        return Err(Error::invalid("h", format!("shift {h} exceeds the domain length")));
    }
    if h == 0.0 {
        return Ok(u.clone());
    }
    let (n, m) = u.dims();
    let mut out = Field::zeros(n, m);
    let mut col1 = vec![0.0; n];
    let mut col2 = vec![0.0; n];
    for j in 0..m {
        for i in 0..n {
            col1[i] = u.u1[i * m + j];
            col2[i] = u.u2[i * m + j];
        }
        for i in 0..n {
            let x = grid.node(i) - h;
            out.u1[i * m + j] = sample_cubic(&col1, grid, x);
            out.u2[i * m + j] = sample_cubic(&col2, grid, x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_integrands() {
        let g = Grid2D::new(Grid1D::new(100, 10.0).unwrap(), 8).unwrap();
        let prof = SurfaceProfile::constant(0.8, 10.0).unwrap();
        let w = QuadratureWeights::surface(&prof, &g).unwrap();
        let n = g.size();
        let a = Field::from_parts(100, 8, vec![1.0; n], vec![0.0; n]).unwrap();
        let b = Field::from_parts(100, 8, vec![0.0; n], vec![1.0; n]).unwrap();
        let area = 2.0 * PI * 0.8 * (g.axial().last() - g.axial().first());
        assert!((weighted_inner(&a, &a, &w, 1e-4).unwrap() - area).abs() < 1e-10);
        assert!((weighted_inner(&b, &b, &w, 1e-4).unwrap() - area / 1e-4).abs() < 1e-6);
    }

    #[test]
    fn cubic_reproduces_cubics() {
        let g = Grid1D::new(20, 5.0).unwrap();
        let v: Vec<f64> = g.nodes().map(|x| x * x * x - 2.0 * x).collect();
        for x in [0.1, 1.37, 2.5, 4.6] {
            assert!((sample_cubic(&v, &g, x) - (x * x * x - 2.0 * x)).abs() < 1e-10);
        }
        assert_eq!(sample_cubic(&v, &g, -3.0), v[0]);
        assert_eq!(sample_cubic(&v, &g, 99.0), v[19]);
    }

    #[test]
    fn shift_tanh() {
        let g = Grid1D::new(400, 100.0).unwrap();
        let f = |x: f64| 0.5 * (1.0 - ((x - 50.0) / 5.0).tanh());
        let u = Field::from_1d(g.nodes().map(f).collect(), vec![0.0; 400]).unwrap();
        let s = shift_field(&u, 0.6, &g).unwrap();
        let err = (40..360)
            .map(|i| (s.u1[i] - f(g.node(i) - 0.6)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
        assert_eq!(shift_field(&u, 0.0, &g).unwrap(), u);
    }
}
