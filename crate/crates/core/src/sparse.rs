//! Small helpers around `sprs` CSR matrices.

use faer::Mat;
use sprs::{CsMat, TriMat};

use crate::banded::BandedMatrix;

/// Builds a CSR matrix from `(row, col, value)` triplets; duplicates are summed.
pub fn from_triplets(rows: usize, cols: usize, entries: &[(usize, usize, f64)]) -> CsMat<f64> {
    let mut tri = TriMat::with_capacity((rows, cols), entries.len());
    for &(i, j, v) in entries {
        tri.add_triplet(i, j, v);
    }
    tri.to_csr()
}

/// `y = A x`.
pub fn mul_into(a: &CsMat<f64>, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(a.cols(), x.len());
    debug_assert_eq!(a.rows(), y.len());
    for (i, row) in a.outer_iterator().enumerate() {
        let mut acc = 0.0;
        for (j, &v) in row.iter() {
            acc += v * x[j];
        }
        y[i] = acc;
    }
}

pub fn mul(a: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.rows()];
    mul_into(a, x, &mut y);
    y
}

/// Triplets of `a`, each multiplied by `scale`.
pub fn triplets(a: &CsMat<f64>, scale: f64) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::with_capacity(a.nnz());
    for (i, row) in a.outer_iterator().enumerate() {
        for (j, &v) in row.iter() {
            out.push((i, j, scale * v));
        }
    }
    out
}

/// `a ⊗ I_m` for axial-major flattening.
pub fn kron_identity_right(a: &CsMat<f64>, m: usize) -> CsMat<f64> {
    let mut entries = Vec::with_capacity(a.nnz() * m);
    for (i, j, v) in triplets(a, 1.0) {
        for k in 0..m {
            entries.push((i * m + k, j * m + k, v));
        }
    }
    from_triplets(a.rows() * m, a.cols() * m, &entries)
}

/// `I_n ⊗ b` for axial-major flattening.
pub fn kron_identity_left(n: usize, b: &CsMat<f64>) -> CsMat<f64> {
    let mut entries = Vec::with_capacity(b.nnz() * n);
    let bt = triplets(b, 1.0);
    for i in 0..n {
        for &(p, q, v) in &bt {
            entries.push((i * b.rows() + p, i * b.cols() + q, v));
        }
    }
    from_triplets(n * b.rows(), n * b.cols(), &entries)
}

/// `alpha a + beta b`.
pub fn linear_combination(alpha: f64, a: &CsMat<f64>, beta: f64, b: &CsMat<f64>) -> CsMat<f64> {
    let mut entries = triplets(a, alpha);
    entries.extend(triplets(b, beta));
    from_triplets(a.rows(), a.cols(), &entries)
}

pub fn identity(n: usize) -> CsMat<f64> {
    CsMat::eye(n)
}

pub fn diagonal(values: &[f64]) -> CsMat<f64> {
    let entries: Vec<_> = values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
    from_triplets(values.len(), values.len(), &entries)
}

/// Largest `|a_ij|`.
pub fn max_abs(a: &CsMat<f64>) -> f64 {
    a.data().iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Largest entry of `|a - b|`.
pub fn max_abs_difference(a: &CsMat<f64>, b: &CsMat<f64>) -> f64 {
    max_abs(&linear_combination(1.0, a, -1.0, b))
}

pub fn to_dense(a: &CsMat<f64>) -> Mat<f64> {
    let mut out = Mat::<f64>::zeros(a.rows(), a.cols());
    for (i, row) in a.outer_iterator().enumerate() {
        for (j, &v) in row.iter() {
            out[(i, j)] += v;
        }
    }
    out
}

pub fn transpose(a: &CsMat<f64>) -> CsMat<f64> {
    let entries: Vec<_> = triplets(a, 1.0).into_iter().map(|(i, j, v)| (j, i, v)).collect();
    from_triplets(a.cols(), a.rows(), &entries)
}

/// Lower and upper bandwidths.
pub fn bandwidths(a: &CsMat<f64>) -> (usize, usize) {
    let mut kl = 0;
    let mut ku = 0;
    for (i, row) in a.outer_iterator().enumerate() {
        for (j, _) in row.iter() {
            if j < i {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
    }
    (kl, ku)
}

pub fn to_banded(a: &CsMat<f64>) -> BandedMatrix {
    let (kl, ku) = bandwidths(a);
    let mut b = BandedMatrix::zeros(a.rows(), kl, ku);
    for (i, row) in a.outer_iterator().enumerate() {
        for (j, &v) in row.iter() {
            b.add(i, j, v);
        }
    }
    b
}
