//! Uniform grids and two-component fields sampled on them.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform axial grid `x_i = origin + i dx`, `i = 0..n`, with `dx = length / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    length: f64,
    origin: f64,
}

impl Grid1D {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        Self::with_origin(n, length, 0.0)
    }

    /// Grid starting at `origin` instead of zero (co-moving coordinates).
    pub fn with_origin(n: usize, length: f64, origin: f64) -> Result<Self> {
        if n < 8 {
            return Err(Error::invalid("n", format!("need at least 8 nodes, got {n}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid("length", format!("must be positive, got {length}")));
        }
        if !origin.is_finite() {
            return Err(Error::invalid("origin", "must be finite"));
        }
        Ok(Grid1D { n, length, origin })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.dx()
    }

    pub fn first(&self) -> f64 {
        self.origin
    }

    pub fn last(&self) -> f64 {
        self.node(self.n - 1)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }
}

/// Axial grid times a periodic angular grid `theta_j = j 2 pi / m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    axial: Grid1D,
    m: usize,
}

impl Grid2D {
    pub fn new(axial: Grid1D, m: usize) -> Result<Self> {
        if m < 4 || m % 2 != 0 {
            return Err(Error::invalid("m", format!("angular count must be even and >= 4, got {m}")));
        }
        Ok(Grid2D { axial, m })
    }

    /// A single angular node; fields on it are axisymmetric 1D data.
    pub fn axisymmetric(axial: Grid1D) -> Self {
        Grid2D { axial, m: 1 }
    }

    pub fn axial(&self) -> &Grid1D {
        &self.axial
    }

    pub fn n(&self) -> usize {
        self.axial.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.m as f64
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta()
    }

    pub fn size(&self) -> usize {
        self.n() * self.m
    }

    /// Flattened index, axial-major.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.m + j
    }
}

/// State pair `(u1, u2)` on `n` axial by `m` angular nodes, axial-major.
/// One-dimensional data uses `m = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    n: usize,
    m: usize,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

impl Field {
    pub fn zeros(n: usize, m: usize) -> Self {
        Field {
            n,
            m,
            u1: vec![0.0; n * m],
            u2: vec![0.0; n * m],
        }
    }

    pub fn zeros_like(grid: &Grid2D) -> Self {
        Self::zeros(grid.n(), grid.m())
    }

    pub fn from_parts(n: usize, m: usize, u1: Vec<f64>, u2: Vec<f64>) -> Result<Self> {
        if u1.len() != n * m || u2.len() != n * m {
            return Err(Error::shape(
                format!("2 x {}", n * m),
                format!("{} + {}", u1.len(), u2.len()),
            ));
        }
        Ok(Field { n, m, u1, u2 })
    }

    /// One-dimensional field.
    pub fn from_1d(u1: Vec<f64>, u2: Vec<f64>) -> Result<Self> {
        let n = u1.len();
        Self::from_parts(n, 1, u1, u2)
    }

    /// Axisymmetric extension of 1D profiles to `m` angular nodes.
    pub fn extend_axisymmetric(u1: &[f64], u2: &[f64], m: usize) -> Result<Self> {
        if u1.len() != u2.len() {
            return Err(Error::shape(u1.len(), u2.len()));
        }
        let n = u1.len();
        let spread = |v: &[f64]| v.iter().flat_map(|&x| std::iter::repeat_n(x, m)).collect();
        Ok(Field {
            n,
            m,
            u1: spread(u1),
            u2: spread(u2),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn len(&self) -> usize {
        self.u1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u1.is_empty()
    }

    pub fn check_grid(&self, grid: &Grid2D) -> Result<()> {
        if self.n != grid.n() || self.m != grid.m() {
            return Err(Error::shape(
                format!("{} x {}", grid.n(), grid.m()),
                format!("{} x {}", self.n, self.m),
            ));
        }
        Ok(())
    }

    pub fn check_same_shape(&self, other: &Field) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::shape(
                format!("{} x {}", self.n, self.m),
                format!("{} x {}", other.n, other.m),
            ));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.u1.iter().chain(&self.u2).all(|v| v.is_finite())
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Field) {
        for (x, y) in self.u1.iter_mut().zip(&other.u1) {
            *x += a * y;
        }
        for (x, y) in self.u2.iter_mut().zip(&other.u2) {
            *x += a * y;
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.u1.iter_mut().chain(self.u2.iter_mut()).for_each(|v| *v *= a);
    }

    pub fn sub(&self, other: &Field) -> Field {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Angular mean of a component, one value per axial node.
    pub fn angular_mean(values: &[f64], m: usize) -> Vec<f64> {
        values
            .chunks(m)
            .map(|row| row.iter().sum::<f64>() / m as f64)
            .collect()
    }

    pub fn u1_mean(&self) -> Vec<f64> {
        Self::angular_mean(&self.u1, self.m)
    }

    pub fn u2_mean(&self) -> Vec<f64> {
        Self::angular_mean(&self.u2, self.m)
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.u1
            .iter()
            .zip(&other.u1)
            .chain(self.u2.iter().zip(&other.u2))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Stacked `[u1; u2]`.
    pub fn to_stacked(&self) -> Vec<f64> {
        let mut v = self.u1.clone();
        v.extend_from_slice(&self.u2);
        v
    }

    pub fn from_stacked(n: usize, m: usize, v: &[f64]) -> Result<Self> {
        if v.len() != 2 * n * m {
            return Err(Error::shape(2 * n * m, v.len()));
        }
        let (a, b) = v.split_at(n * m);
        Self::from_parts(n, m, a.to_vec(), b.to_vec())
    }
}
