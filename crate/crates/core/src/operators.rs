//! Finite-difference operators on the axial/angular grid.
//!
//! The default axial scheme composes two centered first differences,
//! `(1/w1) D1 (w2 D1 u)`, with second-order one-sided end stencils and zero
//! boundary flux. Its interior rows couple `i` to `i +- 2`. The compact
//! three-point conservative form is available as [`AxialScheme::Compact`].

use std::f64::consts::PI;

use sprs::CsMat;

use crate::error::Result;
use crate::geometry::SurfaceProfile;
use crate::grid::{Grid1D, Grid2D};
use crate::model::ModelParams;
use crate::sparse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxialScheme {
    /// `D1 (w2 D1)` with node-sampled weights.
    #[default]
    Composed,
    /// Three-point stencil with `w2` at half nodes.
    Compact,
}

/// End closure of a first-difference operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closure {
    /// Second-order one-sided differences at both ends.
    SecondOrder,
    /// First-order one-sided ends; satisfies summation by parts under trapezoid weights.
    Summation,
}

/// `axial_scale (A ⊗ I_m) + angular_scale (I_n ⊗ A_theta)`.
#[derive(Debug, Clone)]
pub struct Separable {
    pub axial: CsMat<f64>,
    pub axial_scale: f64,
    pub angular_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMeta {
    pub n: usize,
    pub m: usize,
    pub geometry_hash: String,
    pub includes_conductance: bool,
    pub scheme: AxialScheme,
}

/// Sparse operator on axial-major flattened fields.
#[derive(Debug, Clone)]
pub struct AssembledOperator {
    matrix: CsMat<f64>,
    meta: OperatorMeta,
    separable: Option<Separable>,
}

impl AssembledOperator {
    pub fn matrix(&self) -> &CsMat<f64> {
        &self.matrix
    }

    pub fn meta(&self) -> &OperatorMeta {
        &self.meta
    }

    pub fn n(&self) -> usize {
        self.meta.n
    }

    pub fn m(&self) -> usize {
        self.meta.m
    }

    pub fn separable(&self) -> Option<&Separable> {
        self.separable.as_ref()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        sparse::mul(&self.matrix, u)
    }

    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        sparse::mul_into(&self.matrix, u, out)
    }

    /// Largest absolute entry.
    pub fn stencil_norm(&self) -> f64 {
        sparse::max_abs(&self.matrix)
    }

    /// Same operator with every entry multiplied by `s`.
    pub fn scaled(&self, s: f64) -> AssembledOperator {
        AssembledOperator {
            matrix: sparse::from_triplets(
                self.matrix.rows(),
                self.matrix.cols(),
                &sparse::triplets(&self.matrix, s),
            ),
            meta: self.meta.clone(),
            separable: self.separable.as_ref().map(|sep| Separable {
                axial: sep.axial.clone(),
                axial_scale: s * sep.axial_scale,
                angular_scale: s * sep.angular_scale,
            }),
        }
    }
}

/// Centered first difference with the requested end closure.
pub fn first_difference(grid: &Grid1D, closure: Closure) -> CsMat<f64> {
    let n = grid.len();
    let h = grid.dx();
    let mut e = Vec::with_capacity(2 * n + 4);
    match closure {
        Closure::SecondOrder => {
            e.extend([(0, 0, -1.5 / h), (0, 1, 2.0 / h), (0, 2, -0.5 / h)]);
            e.extend([(n - 1, n - 3, 0.5 / h), (n - 1, n - 2, -2.0 / h), (n - 1, n - 1, 1.5 / h)]);
        }
        Closure::Summation => {
            e.extend([(0, 0, -1.0 / h), (0, 1, 1.0 / h)]);
            e.extend([(n - 1, n - 2, -1.0 / h), (n - 1, n - 1, 1.0 / h)]);
        }
    }
    for i in 1..n - 1 {
        e.push((i, i - 1, -0.5 / h));
        e.push((i, i + 1, 0.5 / h));
    }
    sparse::from_triplets(n, n, &e)
}

/// Summation-by-parts first difference with an inflow penalty at the right end.
///
/// Used for the transport of `u2` in the co-moving frame, where information
/// enters from `z_max`.
pub fn first_difference_inflow(grid: &Grid1D) -> CsMat<f64> {
    let n = grid.len();
    let d = first_difference(grid, Closure::Summation);
    let w_end = 0.5 * grid.dx();
    let penalty = sparse::from_triplets(n, n, &[(n - 1, n - 1, 1.0 / w_end)]);
    sparse::linear_combination(1.0, &d, -1.0, &penalty)
}

fn compose_weighted(grid: &Grid1D, w1: &[f64], w2: &[f64]) -> CsMat<f64> {
    let n = grid.len();
    let h = grid.dx();
    // rows of D1 with second-order one-sided ends
    let d1_row = |i: usize| -> Vec<(usize, f64)> {
        if i == 0 {
            vec![(0, -1.5 / h), (1, 2.0 / h), (2, -0.5 / h)]
        } else if i == n - 1 {
            vec![(n - 3, 0.5 / h), (n - 2, -2.0 / h), (n - 1, 1.5 / h)]
        } else {
            vec![(i - 1, -0.5 / h), (i + 1, 0.5 / h)]
        }
    };
    let mut e = Vec::with_capacity(5 * n);
    for i in 0..n {
        for (k, a) in d1_row(i) {
            // zero flux through both ends
            if k == 0 || k == n - 1 {
                continue;
            }
            let s = a * w2[k] / w1[i];
            for (l, b) in d1_row(k) {
                e.push((i, l, s * b));
            }
        }
    }
    sparse::from_triplets(n, n, &e)
}

fn compact_weighted(grid: &Grid1D, w1: &[f64], w2_half: &[f64]) -> CsMat<f64> {
    let n = grid.len();
    let h2 = grid.dx() * grid.dx();
    let mut e = Vec::with_capacity(3 * n);
    let a = 2.0 * w2_half[0] / (h2 * w1[0]);
    e.extend([(0, 0, -a), (0, 1, a)]);
    for i in 1..n - 1 {
        let (l, r) = (w2_half[i - 1], w2_half[i]);
        let s = 1.0 / (h2 * w1[i]);
        e.extend([(i, i - 1, s * l), (i, i, -s * (l + r)), (i, i + 1, s * r)]);
    }
    let b = 2.0 * w2_half[n - 2] / (h2 * w1[n - 1]);
    e.extend([(n - 1, n - 2, b), (n - 1, n - 1, -b)]);
    sparse::from_triplets(n, n, &e)
}

/// Matrix of `u -> (1/w1) (w2 u')'` on the axial grid.
pub fn build_axial_operator(
    profile: &SurfaceProfile,
    grid: &Grid1D,
    scheme: AxialScheme,
) -> Result<AssembledOperator> {
    profile.check_positive_on(grid)?;
    let n = grid.len();
    let mut w1 = Vec::with_capacity(n);
    let mut w2 = Vec::with_capacity(n);
    for x in grid.nodes() {
        let s = profile.metric(x)?;
        w1.push(s.w1);
        w2.push(s.w2);
    }
    let matrix = match scheme {
        AxialScheme::Composed => compose_weighted(grid, &w1, &w2),
        AxialScheme::Compact => {
            let half: Vec<f64> = (0..n - 1)
                .map(|i| profile.metric(grid.node(i) + 0.5 * grid.dx()).map(|s| s.w2))
                .collect::<Result<_>>()?;
            compact_weighted(grid, &w1, &half)
        }
    };
    Ok(AssembledOperator {
        separable: Some(Separable {
            axial: matrix.clone(),
            axial_scale: 1.0,
            angular_scale: 0.0,
        }),
        matrix,
        meta: OperatorMeta {
            n,
            m: 1,
            geometry_hash: profile.fingerprint(),
            includes_conductance: false,
            scheme,
        },
    })
}

/// Unit-weight second difference `u''`, assembled directly from its stencil rows.
pub fn second_difference(grid: &Grid1D, scheme: AxialScheme) -> CsMat<f64> {
    let n = grid.len();
    let h2 = grid.dx() * grid.dx();
    let mut e = Vec::with_capacity(5 * n);
    match scheme {
        AxialScheme::Compact => {
            e.extend([(0, 0, -2.0 / h2), (0, 1, 2.0 / h2)]);
            for i in 1..n - 1 {
                e.extend([(i, i - 1, 1.0 / h2), (i, i, -2.0 / h2), (i, i + 1, 1.0 / h2)]);
            }
            e.extend([(n - 1, n - 2, 2.0 / h2), (n - 1, n - 1, -2.0 / h2)]);
        }
        AxialScheme::Composed => {
            let q = 0.25 / h2;
            // row 0: (2 q_1 - q_2 / 2) / h with q_1 = (u_2 - u_0)/2h, q_2 = (u_3 - u_1)/2h
            e.extend([(0, 0, -4.0 * q), (0, 1, q), (0, 2, 4.0 * q), (0, 3, -q)]);
            // row 1: q_2 / 2h, q_0 = 0
            e.extend([(1, 1, -q), (1, 3, q)]);
            for i in 2..n - 2 {
                e.extend([(i, i - 2, q), (i, i, -2.0 * q), (i, i + 2, q)]);
            }
            e.extend([(n - 2, n - 4, q), (n - 2, n - 2, -q)]);
            e.extend([(n - 1, n - 4, -q), (n - 1, n - 3, 4.0 * q), (n - 1, n - 2, q), (n - 1, n - 1, -4.0 * q)]);
        }
    }
    sparse::from_triplets(n, n, &e)
}

/// Periodic angular stencil `(u_{j-1} - 2 u_j + u_{j+1}) / dtheta^2` on `m` nodes.
pub fn angular_stencil(m: usize) -> CsMat<f64> {
    let dt = 2.0 * PI / m as f64;
    let s = 1.0 / (dt * dt);
    let mut e = Vec::with_capacity(3 * m);
    for j in 0..m {
        e.push((j, (j + m - 1) % m, s));
        e.push((j, j, -2.0 * s));
        e.push((j, (j + 1) % m, s));
    }
    sparse::from_triplets(m, m, &e)
}

/// `I_N ⊗ A_theta` on the flattened grid.
pub fn build_angular_operator(grid: &Grid2D) -> AssembledOperator {
    let (n, m) = (grid.n(), grid.m());
    let matrix = if m == 1 {
        sparse::from_triplets(n, n, &[])
    } else {
        sparse::kron_identity_left(n, &angular_stencil(m))
    };
    AssembledOperator {
        matrix,
        meta: OperatorMeta {
            n,
            m,
            geometry_hash: String::new(),
            includes_conductance: false,
            scheme: AxialScheme::default(),
        },
        separable: Some(Separable {
            axial: sparse::from_triplets(n, n, &[]),
            axial_scale: 0.0,
            angular_scale: 1.0,
        }),
    }
}

fn combine(
    axial: CsMat<f64>,
    axial_scale: f64,
    angular_scale: f64,
    grid: &Grid2D,
    meta: OperatorMeta,
) -> AssembledOperator {
    let m = grid.m();
    let big_axial = sparse::kron_identity_right(&axial, m);
    let matrix = if m == 1 {
        sparse::from_triplets(big_axial.rows(), big_axial.cols(), &sparse::triplets(&big_axial, axial_scale))
    } else {
        let ang = sparse::kron_identity_left(grid.n(), &angular_stencil(m));
        sparse::linear_combination(axial_scale, &big_axial, angular_scale, &ang)
    };
    AssembledOperator {
        matrix,
        meta,
        separable: Some(Separable {
            axial,
            axial_scale,
            angular_scale,
        }),
    }
}

/// Warped-cylinder operator `(pi / r_int) [ (1/w1) d_x (w2 d_x) + d_theta^2 ]`.
///
/// Includes the conductance: for a constant radius `R` this is `G (d_x^2 + R^-2 d_theta^2)`.
pub fn assemble_laplace_beltrami(
    profile: &SurfaceProfile,
    grid: &Grid2D,
    p: &ModelParams,
    scheme: AxialScheme,
) -> Result<AssembledOperator> {
    let axial = build_axial_operator(profile, grid.axial(), scheme)?;
    let s = PI / p.r_int;
    let meta = OperatorMeta {
        n: grid.n(),
        m: grid.m(),
        geometry_hash: profile.fingerprint(),
        includes_conductance: true,
        scheme,
    };
    Ok(combine(axial.matrix, s, s, grid, meta))
}

/// Geometric Laplacian `d_x^2 + R^-2 d_theta^2` of the straight cylinder, from unit stencils.
pub fn cylinder_laplacian(radius: f64, grid: &Grid2D, scheme: AxialScheme) -> AssembledOperator {
    let meta = OperatorMeta {
        n: grid.n(),
        m: grid.m(),
        geometry_hash: String::new(),
        includes_conductance: false,
        scheme,
    };
    combine(second_difference(grid.axial(), scheme), 1.0, 1.0 / (radius * radius), grid, meta)
}

/// Operators of the one-dimensional co-moving system.
#[derive(Debug, Clone)]
pub struct MovingOps {
    grid: Grid1D,
    diffusivity: f64,
    scheme: AxialScheme,
    diffusion: CsMat<f64>,
    dz: CsMat<f64>,
    dz_inflow: CsMat<f64>,
}

impl MovingOps {
    /// Compact diffusion, summation-by-parts advection, inflow penalty for `u2`.
    pub fn compact(grid: Grid1D, diffusivity: f64) -> Self {
        Self::build(grid, diffusivity, AxialScheme::Compact)
    }

    /// Diffusion from the composed axial stencil used by the static-frame solver.
    pub fn composed(grid: Grid1D, diffusivity: f64) -> Self {
        Self::build(grid, diffusivity, AxialScheme::Composed)
    }

    pub fn build(grid: Grid1D, diffusivity: f64, scheme: AxialScheme) -> Self {
        let d2 = second_difference(&grid, scheme);
        let diffusion = sparse::from_triplets(grid.len(), grid.len(), &sparse::triplets(&d2, diffusivity));
        MovingOps {
            grid,
            diffusivity,
            scheme,
            diffusion,
            dz: first_difference(&grid, Closure::Summation),
            dz_inflow: first_difference_inflow(&grid),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn diffusivity(&self) -> f64 {
        self.diffusivity
    }

    pub fn scheme(&self) -> AxialScheme {
        self.scheme
    }

    /// `D d_z^2`.
    pub fn diffusion(&self) -> &CsMat<f64> {
        &self.diffusion
    }

    pub fn dz(&self) -> &CsMat<f64> {
        &self.dz
    }

    pub fn dz_inflow(&self) -> &CsMat<f64> {
        &self.dz_inflow
    }
}

/// Fraction of the discrete energy carried by the odd/even (checkerboard) component.
pub fn checkerboard_fraction(u: &[f64]) -> f64 {
    let n = u.len();
    if n < 3 {
        return 0.0;
    }
    let total: f64 = u.iter().map(|v| v * v).sum();
    if total == 0.0 {
        return 0.0;
    }
    let checker: f64 = (1..n - 1)
        .map(|i| {
            let c = 0.25 * (2.0 * u[i] - u[i - 1] - u[i + 1]);
            c * c
        })
        .sum();
    checker / total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid1D {
        Grid1D::new(n, 10.0).unwrap()
    }

    #[test]
    fn constant_weights_annihilate_constants_and_lines() {
        let g = grid(40);
        let prof = SurfaceProfile::constant(1.0, 10.0).unwrap();
        for scheme in [AxialScheme::Composed, AxialScheme::Compact] {
            let a = build_axial_operator(&prof, &g, scheme).unwrap();
            let ones = vec![1.0; 40];
            assert!(a.apply(&ones).iter().all(|v| v.abs() < 1e-12));
            let line: Vec<f64> = g.nodes().collect();
            let out = a.apply(&line);
            assert!(out[2..38].iter().all(|v| v.abs() < 1e-10), "{scheme:?}");
        }
    }

    #[test]
    fn composed_interior_rows_skip_neighbours() {
        let g = grid(20);
        let prof = SurfaceProfile::constant(1.0, 10.0).unwrap();
        let a = build_axial_operator(&prof, &g, AxialScheme::Composed).unwrap();
        let row = a.matrix().outer_view(10).unwrap();
        let cols: Vec<usize> = row.iter().map(|(j, _)| j).collect();
        assert_eq!(cols, vec![8, 10, 12]);
        let h = g.dx();
        assert!((row.get(8).unwrap() - 0.25 / (h * h)).abs() < 1e-12);
    }

    #[test]
    fn weighted_composition_matches_unit_stencil() {
        let g = grid(30);
        let prof = SurfaceProfile::constant(1.0, 10.0).unwrap();
        for scheme in [AxialScheme::Composed, AxialScheme::Compact] {
            let a = build_axial_operator(&prof, &g, scheme).unwrap();
            let b = second_difference(&g, scheme);
            assert!(sparse::max_abs_difference(a.matrix(), &b) < 1e-10);
        }
    }

    #[test]
    fn angular_cosine() {
        let m = 64;
        let a = angular_stencil(m);
        let u: Vec<f64> = (0..m).map(|j| (2.0 * PI * j as f64 / m as f64).cos()).collect();
        let out = sparse::mul(&a, &u);
        let dt = 2.0 * PI / m as f64;
        let err = out.iter().zip(&u).map(|(o, v)| (o + v).abs()).fold(0.0, f64::max);
        assert!(err <= dt * dt / 12.0 + 1e-12);
    }

    #[test]
    fn inflow_operator_penalizes_last_node() {
        let g = grid(16);
        let d = first_difference(&g, Closure::Summation);
        let s = first_difference_inflow(&g);
        let diff = sparse::linear_combination(1.0, &d, -1.0, &s);
        assert!((diff.get(15, 15).unwrap() - 2.0 / g.dx()).abs() < 1e-12);
        assert_eq!(diff.data().iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn checkerboard_detects_alternation() {
        let alt: Vec<f64> = (0..50).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(checkerboard_fraction(&alt) > 0.9);
        let smooth: Vec<f64> = (0..50).map(|i| (i as f64 * 0.05).sin()).collect();
        assert!(checkerboard_fraction(&smooth) < 1e-3);
    }
}
