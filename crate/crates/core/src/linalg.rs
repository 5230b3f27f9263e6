//! Dense linear algebra used by the estimator, PCA and SVM stages.
//!
//! Everything operates on a small row-major `f64` matrix type. The two
//! nontrivial routines are a Householder QR least-squares solver and a
//! one-sided Jacobi singular value decomposition; both are plain textbook
//! implementations held to the tolerances the rest of the crate tests
//! against.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    /// Matrix of zeros.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from row-major data. `data.len()` must equal `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Argument(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Mutable row `i`.
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Underlying row-major storage.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// True when every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Transposed copy.
    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = out.row_mut(i);
                for j in 0..rhs.cols {
                    orow[j] += a * rrow[j];
                }
            }
        }
        out
    }

    /// Per-column means.
    pub fn col_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (m, v) in means.iter_mut().zip(self.row(i)) {
                *m += v;
            }
        }
        let n = self.rows.max(1) as f64;
        for m in &mut means {
            *m /= n;
        }
        means
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------------------
// Householder QR least squares
// ---------------------------------------------------------------------------

/// Relative threshold below which an R diagonal counts as zero.
const RANK_TOL: f64 = 1e-12;

/// QR factorization of a tall matrix, kept for repeated least-squares solves
/// against different right-hand sides.
#[derive(Debug, Clone)]
pub struct QrLs {
    /// R in the upper triangle, Householder vectors below the diagonal
    /// (with the implicit leading 1 not stored).
    packed: Mat,
    betas: Vec<f64>,
}

impl QrLs {
    /// Factor `a` (rows >= cols). Fails if the matrix is rank-deficient.
    pub fn new(a: &Mat) -> Result<Self> {
        let (m, n) = (a.rows(), a.cols());
        if m < n {
            return Err(Error::Argument(format!(
                "least-squares system has more unknowns ({n}) than equations ({m})"
            )));
        }
        let mut r = a.clone();
        let mut betas = vec![0.0; n];
        let mut v = vec![0.0; m];

        for k in 0..n {
            // Householder vector for column k, rows k..m (Golub & Van Loan 5.1.1).
            let sigma: f64 = (k + 1..m).map(|i| r[(i, k)] * r[(i, k)]).sum();
            let x0 = r[(k, k)];
            let (beta, v0);
            if sigma == 0.0 {
                beta = 0.0;
                v0 = 1.0;
            } else {
                let mu = libm::sqrt(x0 * x0 + sigma);
                let w0 = if x0 <= 0.0 { x0 - mu } else { -sigma / (x0 + mu) };
                beta = 2.0 * w0 * w0 / (sigma + w0 * w0);
                v0 = w0;
            }
            v[k] = 1.0;
            for i in k + 1..m {
                v[i] = r[(i, k)] / v0;
            }
            // Apply (I - beta v v^T) to the trailing block.
            for j in k..n {
                let mut s = 0.0;
                for i in k..m {
                    s += v[i] * r[(i, j)];
                }
                s *= beta;
                for i in k..m {
                    r[(i, j)] -= s * v[i];
                }
            }
            // Store the reflector below the diagonal.
            for i in k + 1..m {
                r[(i, k)] = v[i];
            }
            betas[k] = beta;
        }

        let max_diag = (0..n).map(|k| r[(k, k)].abs()).fold(0.0, f64::max);
        for k in 0..n {
            if r[(k, k)].abs() <= RANK_TOL * max_diag || max_diag == 0.0 {
                return Err(Error::Estimation(format!(
                    "rank-deficient least-squares system: |R[{k},{k}]| = {:.3e} \
                     against max diagonal {:.3e}",
                    r[(k, k)].abs(),
                    max_diag
                )));
            }
        }
        Ok(QrLs { packed: r, betas })
    }

    /// Solve `min ||A x - b||_2` for the factored A.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (m, n) = (self.packed.rows(), self.packed.cols());
        assert_eq!(b.len(), m, "right-hand side length mismatch");
        let mut y = b.to_vec();
        // y = Q^T b
        for k in 0..n {
            let beta = self.betas[k];
            if beta == 0.0 {
                continue;
            }
            let mut s = y[k];
            for i in k + 1..m {
                s += self.packed[(i, k)] * y[i];
            }
            s *= beta;
            y[k] -= s;
            for i in k + 1..m {
                y[i] -= s * self.packed[(i, k)];
            }
        }
        // Back-substitution on R.
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let mut s = y[k];
            for j in k + 1..n {
                s -= self.packed[(k, j)] * x[j];
            }
            x[k] = s / self.packed[(k, k)];
        }
        x
    }
}

// ---------------------------------------------------------------------------
// One-sided Jacobi SVD
// ---------------------------------------------------------------------------

/// Singular value decomposition `A = U * diag(sigma) * V^T`.
///
/// Thin form: for an `m x n` input with `k = min(m, n)`, `u` is `m x k`,
/// `sigma` has `k` nonincreasing nonnegative entries and `v` is `n x k`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Mat,
    pub sigma: Vec<f64>,
    pub v: Mat,
}

impl SvdResult {
    /// Reconstruct `U * diag(sigma) * V^T`.
    pub fn reconstruct(&self) -> Mat {
        let k = self.sigma.len();
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for j in 0..k {
                us[(i, j)] *= self.sigma[j];
            }
        }
        us.matmul(&self.v.transpose())
    }
}

const JACOBI_EPS: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Thin SVD via one-sided Jacobi rotations.
///
/// Singular values come out sorted nonincreasing; the sign of each right
/// singular vector is fixed so that its entry of largest magnitude is
/// nonnegative, which makes outputs reproducible across runs.
pub fn svd(a: &Mat) -> Result<SvdResult> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::Argument("svd of an empty matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::Argument("svd input contains non-finite entries".into()));
    }
    let mut out = if a.rows() >= a.cols() {
        jacobi_tall(a)?
    } else {
        let t = jacobi_tall(&a.transpose())?;
        SvdResult {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        }
    };
    fix_signs(&mut out);
    Ok(out)
}

/// One-sided Jacobi on a tall matrix (rows >= cols): rotates column pairs of
/// a working copy until all pairs are orthogonal, accumulating the rotations
/// into V; column norms are then the singular values.
fn jacobi_tall(a: &Mat) -> Result<SvdResult> {
    let (m, n) = (a.rows(), a.cols());
    // Column-major working copy for cheap column access.
    let mut b: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a[(i, j)]).collect()).collect();
    let mut v = Mat::identity(n);

    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (alpha, beta, gamma); // ||bp||^2, ||bq||^2, <bp, bq>
                {
                    let (bp, bq) = (&b[p], &b[q]);
                    alpha = dot(bp, bp);
                    beta = dot(bq, bq);
                    gamma = dot(bp, bq);
                }
                if gamma.abs() <= JACOBI_EPS * libm::sqrt(alpha * beta) || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + libm::sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + libm::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                // Rotate columns p and q of B and of V.
                for i in 0..m {
                    let (bp, bq) = (b[p][i], b[q][i]);
                    b[p][i] = c * bp - s * bq;
                    b[q][i] = s * bp + c * bq;
                }
                for i in 0..n {
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps > JACOBI_MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "jacobi svd did not converge within {JACOBI_MAX_SWEEPS} sweeps \
                 on a {m}x{n} matrix"
            )));
        }
    }

    // Column norms are the singular values; sort nonincreasing.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = b.iter().map(|col| libm::sqrt(dot(col, col))).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let mut sigma = Vec::with_capacity(n);
    let mut u = Mat::zeros(m, n);
    let mut v_sorted = Mat::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        sigma.push(norms[src]);
        for i in 0..n {
            v_sorted[(i, k)] = v[(i, src)];
        }
        if norms[src] > 0.0 {
            for i in 0..m {
                u[(i, k)] = b[src][i] / norms[src];
            }
        }
    }

    // Columns with negligible singular value carry no usable direction in B;
    // replace them with an orthonormal fill so that U^T U = I still holds.
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let tiny = sigma_max * 1e-12;
    let needs_fill: Vec<usize> = (0..n).filter(|&k| sigma[k] <= tiny).collect();
    for &k in &needs_fill {
        for i in 0..m {
            u[(i, k)] = 0.0;
        }
    }
    for &k in &needs_fill {
        'candidates: for e in 0..m {
            let mut cand = vec![0.0; m];
            cand[e] = 1.0;
            // Two Gram-Schmidt passes against every other (possibly zero) column.
            for _ in 0..2 {
                for j in 0..n {
                    if j == k {
                        continue;
                    }
                    let proj: f64 = (0..m).map(|i| cand[i] * u[(i, j)]).sum();
                    if proj != 0.0 {
                        for i in 0..m {
                            cand[i] -= proj * u[(i, j)];
                        }
                    }
                }
            }
            let norm = libm::sqrt(dot(&cand, &cand));
            if norm > 0.5 {
                for i in 0..m {
                    u[(i, k)] = cand[i] / norm;
                }
                break 'candidates;
            }
        }
    }

    Ok(SvdResult {
        u,
        sigma,
        v: v_sorted,
    })
}

/// Make the largest-magnitude entry of each right singular vector
/// nonnegative, flipping the matching left vector to preserve the product.
fn fix_signs(svd: &mut SvdResult) {
    let k = svd.sigma.len();
    for j in 0..k {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for i in 0..svd.v.rows() {
            let a = svd.v[(i, j)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if svd.v[(best, j)] < 0.0 {
            for i in 0..svd.v.rows() {
                svd.v[(i, j)] = -svd.v[(i, j)];
            }
            for i in 0..svd.u.rows() {
                svd.u[(i, j)] = -svd.u[(i, j)];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn random_mat(rows: usize, cols: usize, key: u64) -> Mat {
        let mut rng = SeededRng::new(&[key]);
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = rng.gaussian_pair().0;
            }
        }
        m
    }

    #[test]
    fn matmul_and_transpose() {
        let a = Mat::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = a.transpose();
        let p = a.matmul(&b);
        assert_eq!(p.rows(), 2);
        assert_eq!(p[(0, 0)], 14.0);
        assert_eq!(p[(0, 1)], 32.0);
        assert_eq!(p[(1, 1)], 77.0);
    }

    #[test]
    fn qr_solves_exact_system() {
        let a = Mat::from_vec(3, 2, vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        // b = A * [2, -3]
        let b = [2.0, -3.0, -1.0];
        let qr = QrLs::new(&a).unwrap();
        let x = qr.solve(&b);
        assert!((x[0] - 2.0).abs() < 1e-12);
        assert!((x[1] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn qr_least_squares_matches_normal_equations() {
        let a = random_mat(30, 5, 11);
        let mut rng = SeededRng::new(&[12]);
        let b: Vec<f64> = (0..30).map(|_| rng.gaussian_pair().0).collect();
        let x = QrLs::new(&a).unwrap().solve(&b);
        // Residual must be orthogonal to the column space: A^T (A x - b) = 0.
        let mut resid = vec![0.0; 30];
        for i in 0..30 {
            resid[i] = dot(a.row(i), &x) - b[i];
        }
        for j in 0..5 {
            let g: f64 = (0..30).map(|i| a[(i, j)] * resid[i]).sum();
            assert!(g.abs() < 1e-10, "gradient component {g}");
        }
    }

    #[test]
    fn qr_rejects_rank_deficient() {
        // Second column is twice the first.
        let a = Mat::from_vec(3, 2, vec![1.0, 2.0, 2.0, 4.0, 3.0, 6.0]).unwrap();
        match QrLs::new(&a) {
            Err(Error::Estimation(msg)) => assert!(msg.contains("rank-deficient")),
            other => panic!("expected rank-deficiency error, got {other:?}"),
        }
    }

    #[test]
    fn svd_identity() {
        let s = svd(&Mat::identity(2)).unwrap();
        assert!((s.sigma[0] - 1.0).abs() < 1e-14);
        assert!((s.sigma[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn svd_diagonal_matrix_hand_check() {
        // Singular values of [[3, 0], [0, -4]] are [4, 3]: the eigenvalues of
        // A^T A are 16 and 9.
        let a = Mat::from_vec(2, 2, vec![3.0, 0.0, 0.0, -4.0]).unwrap();
        let s = svd(&a).unwrap();
        assert!((s.sigma[0] - 4.0).abs() < 1e-12, "sigma {:?}", s.sigma);
        assert!((s.sigma[1] - 3.0).abs() < 1e-12);
        assert!(s.reconstruct().max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn svd_reconstructs_random_matrices() {
        for key in 0..5u64 {
            let a = random_mat(50, 40, 100 + key);
            let s = svd(&a).unwrap();
            assert!(s.reconstruct().max_abs_diff(&a) < 1e-8);
            // Orthonormality.
            let utu = s.u.transpose().matmul(&s.u);
            let vtv = s.v.transpose().matmul(&s.v);
            let eye = Mat::identity(40);
            assert!(utu.max_abs_diff(&eye) < 1e-8);
            assert!(vtv.max_abs_diff(&eye) < 1e-8);
            // Nonincreasing.
            for w in s.sigma.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn svd_wide_matrix_via_transpose() {
        let a = random_mat(4, 9, 55);
        let s = svd(&a).unwrap();
        assert_eq!(s.u.rows(), 4);
        assert_eq!(s.u.cols(), 4);
        assert_eq!(s.v.rows(), 9);
        assert_eq!(s.v.cols(), 4);
        assert!(s.reconstruct().max_abs_diff(&a) < 1e-8);
    }

    #[test]
    fn svd_rank_one_keeps_u_orthonormal() {
        // Two opposite rows: rank exactly 1 after the second column collapses.
        let a = Mat::from_vec(2, 6, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, -1.0, -2.0, -3.0, -4.0, -5.0, -6.0])
            .unwrap();
        let s = svd(&a).unwrap();
        assert!(s.sigma[1] < 1e-10 * s.sigma[0] + 1e-300);
        let utu = s.u.transpose().matmul(&s.u);
        assert!(utu.max_abs_diff(&Mat::identity(2)) < 1e-8);
        assert!(s.reconstruct().max_abs_diff(&a) < 1e-8);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut a = Mat::zeros(2, 2);
        a[(0, 0)] = f64::NAN;
        assert!(matches!(svd(&a), Err(Error::Argument(_))));
    }

    #[test]
    fn svd_sign_convention_is_applied() {
        let a = random_mat(12, 5, 321);
        let s = svd(&a).unwrap();
        for j in 0..5 {
            let col: Vec<f64> = (0..5).map(|i| s.v[(i, j)]).collect();
            let best = col
                .iter()
                .cloned()
                .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            assert!(best >= 0.0, "column {j} dominant entry {best}");
        }
    }
}
