//! Principal component analysis via the singular value decomposition.
//!
//! Columns are mean-centered, the centered matrix is decomposed as
//! `A = U * diag(sigma) * V^T`, and the principal components are
//! `F = U * diag(sigma)` (equivalently `A * V`). The information carried by
//! component `k` is reported as `100 * sigma_k^2 / sum(sigma^2)` — a
//! second-order-moment share, which is the explained variance because the
//! columns were centered first.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{svd, Mat};

/// PCA of one data matrix.
#[derive(Debug, Clone)]
pub struct PcaResult {
    /// Principal components `F = U * diag(sigma)`, one row per input row.
    pub components: Mat,
    /// Percent of total variance per component, nonincreasing, summing
    /// to 100 (for nonzero data).
    pub explained_pct: Vec<f64>,
    /// Column means removed before the decomposition.
    pub mean: Vec<f64>,
    /// Right singular vectors of the centered matrix (one column per
    /// component); `components = centered * rotation`.
    pub rotation: Mat,
    /// Singular values of the centered matrix.
    pub singular: Vec<f64>,
}

/// Run PCA on `a` (at least 2 rows).
pub fn pca(a: &Mat) -> Result<PcaResult> {
    if a.rows() < 2 {
        return Err(Error::Argument(format!(
            "pca needs at least 2 rows, got {}",
            a.rows()
        )));
    }
    let mean = a.col_means();
    let mut centered = a.clone();
    for i in 0..centered.rows() {
        let row = centered.row_mut(i);
        for (v, m) in row.iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    let dec = svd(&centered)?;
    let k = dec.sigma.len();
    let mut components = dec.u;
    for i in 0..components.rows() {
        let row = components.row_mut(i);
        for (j, v) in row.iter_mut().enumerate().take(k) {
            *v *= dec.sigma[j];
        }
    }
    let total: f64 = dec.sigma.iter().map(|s| s * s).sum();
    let explained_pct = if total > 0.0 {
        dec.sigma.iter().map(|s| 100.0 * s * s / total).collect()
    } else {
        // Degenerate all-zero data: no variance to attribute.
        dec.sigma.iter().map(|_| 0.0).collect()
    };
    Ok(PcaResult {
        components,
        explained_pct,
        mean,
        rotation: dec.v,
        singular: dec.sigma,
    })
}

/// First `k` principal components, one row per input row.
pub fn project(result: &PcaResult, k: usize) -> Result<Mat> {
    let n = result.components.cols();
    if k < 1 || k > n {
        return Err(Error::Argument(format!(
            "projection onto {k} components out of range 1..={n}"
        )));
    }
    let mut out = Mat::zeros(result.components.rows(), k);
    for i in 0..out.rows() {
        out.row_mut(i).copy_from_slice(&result.components.row(i)[..k]);
    }
    Ok(out)
}

/// Scree data: `(1-based component index, explained percentage)` pairs.
pub fn scree(result: &PcaResult) -> Vec<(usize, f64)> {
    result
        .explained_pct
        .iter()
        .enumerate()
        .map(|(i, &p)| (i + 1, p))
        .collect()
}
