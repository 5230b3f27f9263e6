//! Soft-margin linear support vector machine.
//!
//! `train_binary` minimizes the primal objective
//! `0.5 * ||w||^2 + C * sum_i max(0, 1 - y_i * (<w, x_i> + b))`
//! with an unregularized bias, by solving the dual box-constrained QP with
//! an SMO-style solver: maximal-violating-pair selection, two-variable
//! analytic updates, and the cached margins kept in sync so each iteration
//! costs one `O(n * d)` pass. Multiclass training is one-vs-rest over
//! sorted class codes and prediction takes the arg-max decision value,
//! ties broken toward the lowest class code.
//!
//! `oracle_train` solves the same dual by projected gradient descent with
//! exact line search, a deliberately different algorithm used to verify the
//! main solver on small instances.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Multiclass reduction scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiclass {
    OneVsRest,
}

/// Training configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmConfig {
    /// Penalty parameter weighting the hinge losses.
    pub c: f64,
    /// Convergence threshold on the maximal KKT violation.
    pub tolerance: f64,
    /// Iteration cap for the pair solver.
    pub max_iterations: usize,
    pub multiclass: Multiclass,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            tolerance: 1e-6,
            max_iterations: 2_000_000,
            multiclass: Multiclass::OneVsRest,
        }
    }
}

impl SvmConfig {
    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::Argument(format!("penalty C must be positive, got {}", self.c)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Argument("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// One trained separating hyperplane.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Pair updates the solver performed.
    pub iterations: usize,
    /// Primal objective at the returned solution.
    pub objective: f64,
}

/// One-vs-rest multiclass model: one hyperplane per class.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvmModel {
    /// Class codes in ascending order; row `k` of `weights` scores class
    /// `classes[k]`.
    pub classes: Vec<u8>,
    pub weights: Mat,
    pub biases: Vec<f64>,
    /// Penalty the model was trained with.
    pub c: f64,
    /// Per-class solver iterations and final primal objectives.
    pub iterations: Vec<usize>,
    pub objectives: Vec<f64>,
}

/// Prediction for one row: winning class and per-class decision values
/// (ordered like `LinearSvmModel::classes`).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: u8,
    pub decision: Vec<f64>,
}

fn validate_rows(x: &Mat, n_labels: usize) -> Result<()> {
    if x.rows() != n_labels {
        return Err(Error::Argument(format!(
            "{} rows but {} labels",
            x.rows(),
            n_labels
        )));
    }
    if !x.is_finite() {
        return Err(Error::Argument("training data contains non-finite values".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Binary solver
// ---------------------------------------------------------------------------

/// Train one hyperplane on +-1 labels.
pub fn train_binary(x: &Mat, y: &[i8], config: &SvmConfig) -> Result<BinaryModel> {
    config.validate()?;
    validate_rows(x, y.len())?;
    if y.iter().any(|&v| v != 1 && v != -1) {
        return Err(Error::Argument("binary labels must be +1 or -1".into()));
    }
    if !y.contains(&1) || !y.contains(&-1) {
        return Err(Error::Argument(
            "training needs at least one example of each sign".into(),
        ));
    }

    let (n, d) = (x.rows(), x.cols());
    let c = config.c;
    let ys: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let diag: Vec<f64> = (0..n).map(|i| dot(x.row(i), x.row(i))).collect();

    let mut alpha = vec![0.0f64; n];
    let mut w = vec![0.0f64; d];
    // u[t] = <w, x_t>; the KKT violation value of t is v[t] = y[t] - u[t].
    let mut u = vec![0.0f64; n];
    let mut iterations = 0usize;
    let (mut m_up, mut m_low);

    // Active set for shrinking: variables stuck at a bound with their KKT
    // condition satisfied with slack are frozen; once the active problem
    // converges, everything is reactivated and the global gap rechecked,
    // so shrinking never changes the answer, only the work.
    let mut active: Vec<usize> = (0..n).collect();
    let mut dx = vec![0.0f64; d];
    let shrink_every = 1000usize;
    let mut since_shrink = 0usize;

    'outer: loop {
        // Maximal violating pair over the active index sets
        //   I_up  = { t : alpha_t < C, y_t = +1 } u { t : alpha_t > 0, y_t = -1 }
        //   I_low = { t : alpha_t < C, y_t = -1 } u { t : alpha_t > 0, y_t = +1 }
        let mut i = usize::MAX;
        let mut j = usize::MAX;
        m_up = f64::NEG_INFINITY;
        m_low = f64::INFINITY;
        for &t in &active {
            let v = ys[t] - u[t];
            let in_up = (ys[t] > 0.0 && alpha[t] < c) || (ys[t] < 0.0 && alpha[t] > 0.0);
            let in_low = (ys[t] < 0.0 && alpha[t] < c) || (ys[t] > 0.0 && alpha[t] > 0.0);
            if in_up && v > m_up {
                m_up = v;
                i = t;
            }
            if in_low && v < m_low {
                m_low = v;
                j = t;
            }
        }

        if m_up - m_low <= config.tolerance || i == usize::MAX || j == usize::MAX {
            // Active problem solved: reactivate everything and recheck.
            for t in 0..n {
                u[t] = dot(x.row(t), &w);
            }
            let mut g_up = f64::NEG_INFINITY;
            let mut g_low = f64::INFINITY;
            for t in 0..n {
                let v = ys[t] - u[t];
                if (ys[t] > 0.0 && alpha[t] < c) || (ys[t] < 0.0 && alpha[t] > 0.0) {
                    g_up = g_up.max(v);
                }
                if (ys[t] < 0.0 && alpha[t] < c) || (ys[t] > 0.0 && alpha[t] > 0.0) {
                    g_low = g_low.min(v);
                }
            }
            m_up = g_up;
            m_low = g_low;
            if g_up - g_low <= config.tolerance {
                break 'outer;
            }
            if active.len() == n {
                // Nothing was shrunk and the gap persists: numerical
                // stall; treated as non-convergence below.
                if iterations >= config.max_iterations {
                    return Err(Error::Numeric(format!(
                        "svm did not converge in {} iterations; KKT gap {:.3e} > {:.3e}",
                        config.max_iterations,
                        g_up - g_low,
                        config.tolerance
                    )));
                }
            }
            active = (0..n).collect();
            since_shrink = 0;
            continue;
        }
        if iterations >= config.max_iterations {
            return Err(Error::Numeric(format!(
                "svm did not converge in {} iterations; KKT gap {:.3e} > {:.3e}",
                config.max_iterations,
                m_up - m_low,
                config.tolerance
            )));
        }

        // Two-variable update along the equality-feasible direction:
        // alpha_i += y_i * delta, alpha_j -= y_j * delta.
        let xi = x.row(i);
        let xj = x.row(j);
        let a = (diag[i] + diag[j] - 2.0 * dot(xi, xj)).max(1e-12);
        let mut delta = (m_up - m_low) / a;
        let (lo_i, hi_i) = if ys[i] > 0.0 {
            (-alpha[i], c - alpha[i])
        } else {
            (alpha[i] - c, alpha[i])
        };
        let (lo_j, hi_j) = if ys[j] > 0.0 {
            (alpha[j] - c, alpha[j])
        } else {
            (-alpha[j], c - alpha[j])
        };
        delta = delta.min(hi_i.min(hi_j)).max(lo_i.max(lo_j));

        alpha[i] = (alpha[i] + ys[i] * delta).clamp(0.0, c);
        alpha[j] = (alpha[j] - ys[j] * delta).clamp(0.0, c);
        // dw = delta * (x_i - x_j); one fused pass updates w and active u_t.
        for (k, dxk) in dx.iter_mut().enumerate() {
            *dxk = xi[k] - xj[k];
            w[k] += delta * *dxk;
        }
        for &t in &active {
            u[t] += delta * dot(x.row(t), &dx);
        }
        iterations += 1;

        since_shrink += 1;
        if since_shrink >= shrink_every {
            since_shrink = 0;
            // Freeze bound variables whose violation value sits strictly
            // outside the current window on their satisfied side.
            active.retain(|&t| {
                let v = ys[t] - u[t];
                let shrinkable = if alpha[t] <= 0.0 {
                    if ys[t] > 0.0 {
                        v < m_low
                    } else {
                        v > m_up
                    }
                } else if alpha[t] >= c {
                    if ys[t] > 0.0 {
                        v > m_up
                    } else {
                        v < m_low
                    }
                } else {
                    false
                };
                !shrinkable
            });
        }
    }

    // u holds fresh margins from the final global recheck; the bias comes
    // from the free support vectors.
    let bias = bias_from(&alpha, &ys, &u, c, m_up, m_low);
    let objective = objective(&w, bias, x, y, c);
    Ok(BinaryModel {
        weights: w,
        bias,
        iterations,
        objective,
    })
}

/// Bias from the free support vectors, falling back to the midpoint of the
/// feasible interval when none are strictly inside the box.
fn bias_from(alpha: &[f64], ys: &[f64], u: &[f64], c: f64, m_up: f64, m_low: f64) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for t in 0..alpha.len() {
        if alpha[t] > 1e-9 * c && alpha[t] < c * (1.0 - 1e-9) {
            sum += ys[t] - u[t];
            count += 1;
        }
    }
    if count > 0 {
        sum / count as f64
    } else {
        (m_up + m_low) / 2.0
    }
}

/// Four-accumulator dot product; the reassociated sums let the compiler
/// vectorize what a strict left-to-right fold cannot.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let mut ca = a[..n].chunks_exact(4);
    let mut cb = b[..n].chunks_exact(4);
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in (&mut ca).zip(&mut cb) {
        s0 += x[0] * y[0];
        s1 += x[1] * y[1];
        s2 += x[2] * y[2];
        s3 += x[3] * y[3];
    }
    let mut rest = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        rest += x * y;
    }
    (s0 + s1) + (s2 + s3) + rest
}

/// Primal objective `0.5 ||w||^2 + C * sum hinge` evaluated exactly.
pub fn objective(weights: &[f64], bias: f64, x: &Mat, y: &[i8], c: f64) -> f64 {
    let reg = 0.5 * dot(weights, weights);
    let mut loss = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let margin = yi as f64 * (dot(x.row(i), weights) + bias);
        loss += (1.0 - margin).max(0.0);
    }
    reg + c * loss
}

// ---------------------------------------------------------------------------
// Multiclass wrapper
// ---------------------------------------------------------------------------

/// Train a one-vs-rest model over class codes.
pub fn train(x: &Mat, labels: &[u8], config: &SvmConfig) -> Result<LinearSvmModel> {
    config.validate()?;
    validate_rows(x, labels.len())?;
    let mut classes: Vec<u8> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::Argument(format!(
            "training needs at least 2 distinct classes, got {}",
            classes.len()
        )));
    }
    let mut weights = Mat::zeros(classes.len(), x.cols());
    let mut biases = Vec::with_capacity(classes.len());
    let mut iterations = Vec::with_capacity(classes.len());
    let mut objectives = Vec::with_capacity(classes.len());
    for (k, &class) in classes.iter().enumerate() {
        let y: Vec<i8> = labels
            .iter()
            .map(|&l| if l == class { 1 } else { -1 })
            .collect();
        let model = train_binary(x, &y, config)?;
        weights.row_mut(k).copy_from_slice(&model.weights);
        biases.push(model.bias);
        iterations.push(model.iterations);
        objectives.push(model.objective);
    }
    Ok(LinearSvmModel {
        classes,
        weights,
        biases,
        c: config.c,
        iterations,
        objectives,
    })
}

/// Score every row of `x` against every class hyperplane.
pub fn predict(model: &LinearSvmModel, x: &Mat) -> Result<Vec<Prediction>> {
    if x.cols() != model.weights.cols() {
        return Err(Error::Argument(format!(
            "model expects {} features, matrix has {}",
            model.weights.cols(),
            x.cols()
        )));
    }
    let mut out = Vec::with_capacity(x.rows());
    for i in 0..x.rows() {
        let row = x.row(i);
        let decision: Vec<f64> = (0..model.classes.len())
            .map(|k| dot(model.weights.row(k), row) + model.biases[k])
            .collect();
        // Arg-max with ties toward the lowest class code (classes are
        // sorted, so the first maximal entry wins).
        let mut best = 0usize;
        for (k, &v) in decision.iter().enumerate() {
            if v > decision[best] {
                best = k;
            }
        }
        out.push(Prediction {
            label: model.classes[best],
            decision,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Small-instance oracle
// ---------------------------------------------------------------------------

/// Exact solution of the dual on a small instance, by projected gradient
/// with exact line search. Returns the hyperplane plus the dual variables
/// so callers can check the KKT conditions independently.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub alphas: Vec<f64>,
    pub objective: f64,
}

/// Cap on oracle instance size; beyond this the dense solve is not "small".
pub const ORACLE_MAX_ROWS: usize = 64;

pub fn oracle_train(x: &Mat, y: &[i8], c: f64) -> Result<OracleSolution> {
    validate_rows(x, y.len())?;
    if x.rows() > ORACLE_MAX_ROWS {
        return Err(Error::Argument(format!(
            "oracle instance of {} rows exceeds the {ORACLE_MAX_ROWS}-row cap",
            x.rows()
        )));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Argument(format!("penalty C must be positive, got {c}")));
    }
    if y.iter().any(|&v| v != 1 && v != -1) {
        return Err(Error::Argument("binary labels must be +1 or -1".into()));
    }
    if !y.contains(&1) || !y.contains(&-1) {
        return Err(Error::Argument(
            "oracle needs at least one example of each sign".into(),
        ));
    }

    let n = x.rows();
    let ys: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    // Dense Q with Q_ij = y_i y_j <x_i, x_j>.
    let mut q = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] = ys[i] * ys[j] * dot(x.row(i), x.row(j));
        }
    }
    // Lipschitz constant of the gradient: the largest eigenvalue of Q,
    // estimated by power iteration and inflated for safety.
    let mut pow = vec![1.0f64; n];
    let mut lam = 0.0;
    for _ in 0..200 {
        let next: Vec<f64> = (0..n).map(|i| dot(q.row(i), &pow)).collect();
        lam = libm::sqrt(dot(&next, &next));
        if lam <= 1e-300 {
            break;
        }
        pow = next.iter().map(|v| v / lam).collect();
    }
    let step = 1.0 / (1.05 * lam).max(1e-12);

    let mut alpha = vec![0.0f64; n];
    let mut grad = vec![-1.0f64; n]; // Q * 0 - 1
    // Stationarity is measured by the maximal KKT violation over the
    // feasible index sets; 1e-10 leaves the downstream 1e-6 checks ample
    // slack. The step-norm floor catches fully degenerate instances where
    // the projected point stops moving altogether.
    let gap_tol = 1e-10;
    let max_iters = 2_000_000;
    let mut converged = false;
    for _ in 0..max_iters {
        let mut up = f64::NEG_INFINITY;
        let mut low = f64::INFINITY;
        for t in 0..n {
            // For the dual min problem the violation value is -y_t * grad_t.
            let v = -ys[t] * grad[t];
            if (ys[t] > 0.0 && alpha[t] < c) || (ys[t] < 0.0 && alpha[t] > 0.0) {
                up = up.max(v);
            }
            if (ys[t] < 0.0 && alpha[t] < c) || (ys[t] > 0.0 && alpha[t] > 0.0) {
                low = low.min(v);
            }
        }
        if up - low <= gap_tol {
            converged = true;
            break;
        }
        // Full projected-gradient step. The projection clamps variables
        // exactly onto the box bounds, which the index-set classification
        // above relies on; partial steps would only approach the bounds
        // asymptotically and leave the gap open.
        let target: Vec<f64> = (0..n).map(|t| alpha[t] - step * grad[t]).collect();
        let projected = project_box_hyperplane(&target, &ys, c);
        let dir: Vec<f64> = (0..n).map(|t| projected[t] - alpha[t]).collect();
        let dir_norm = dir.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if dir_norm <= 1e-15 * (1.0 + c) {
            converged = true;
            break;
        }
        let qd: Vec<f64> = (0..n).map(|i| dot(q.row(i), &dir)).collect();
        for i in 0..n {
            alpha[i] = projected[i];
            grad[i] += qd[i];
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "oracle projected gradient did not reach stationarity in {max_iters} iterations"
        )));
    }

    let mut weights = vec![0.0f64; x.cols()];
    for i in 0..n {
        let coeff = alpha[i] * ys[i];
        if coeff != 0.0 {
            for (k, w) in weights.iter_mut().enumerate() {
                *w += coeff * x.row(i)[k];
            }
        }
    }
    let u: Vec<f64> = (0..n).map(|i| dot(x.row(i), &weights)).collect();
    // Bias from free SVs, else midpoint of the KKT-feasible interval.
    let mut sum = 0.0;
    let mut count = 0;
    let mut up = f64::NEG_INFINITY;
    let mut low = f64::INFINITY;
    for t in 0..n {
        let v = ys[t] - u[t];
        if alpha[t] > 1e-9 * c && alpha[t] < c * (1.0 - 1e-9) {
            sum += v;
            count += 1;
        }
        let in_up = (ys[t] > 0.0 && alpha[t] < c) || (ys[t] < 0.0 && alpha[t] > 0.0);
        let in_low = (ys[t] < 0.0 && alpha[t] < c) || (ys[t] > 0.0 && alpha[t] > 0.0);
        if in_up {
            up = up.max(v);
        }
        if in_low {
            low = low.min(v);
        }
    }
    let bias = if count > 0 {
        sum / count as f64
    } else {
        (up + low) / 2.0
    };
    let objective = objective(&weights, bias, x, y, c);
    Ok(OracleSolution {
        weights,
        bias,
        alphas: alpha,
        objective,
    })
}

/// Euclidean projection onto `{ z : 0 <= z <= C, <y, z> = 0 }` by bisection
/// on the hyperplane multiplier.
fn project_box_hyperplane(v: &[f64], ys: &[f64], c: f64) -> Vec<f64> {
    let eval = |mu: f64| -> f64 {
        v.iter()
            .zip(ys)
            .map(|(&vi, &yi)| yi * (vi - mu * yi).clamp(0.0, c))
            .sum()
    };
    let bound = v.iter().map(|a| a.abs()).fold(0.0, f64::max) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    // g(mu) = <y, z(mu)> is nonincreasing; bisect to the root.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    v.iter()
        .zip(ys)
        .map(|(&vi, &yi)| (vi - mu * yi).clamp(0.0, c))
        .collect()
}
