use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::linalg::dense::DenseMatrix;

static SOLVER_CALLS: AtomicU64 = AtomicU64::new(0);

/// Number of regularized least-squares solves performed so far. Lets tests
/// assert that a training run is a single solver call.
pub fn solver_invocations() -> u64 {
    SOLVER_CALLS.load(Ordering::Relaxed)
}

/// W minimizing ||W Z - Y||_F^2 + lambda ||W||_F^2 for design Z (d x T) and
/// targets Y (m x T), returned as an m x d matrix.
///
/// Solves the normal equations W (Z Z^T + lambda I) = Y Z^T through a
/// symmetric positive definite factorization; if that factorization fails
/// the solve falls back to an orthogonal factorization of the stacked
/// regularized system. A rank-deficient system with lambda = 0 is an error.
pub fn solve_regularized_ls(
    design: &DenseMatrix,
    targets: &DenseMatrix,
    lambda: f64,
) -> Result<DenseMatrix> {
    SOLVER_CALLS.fetch_add(1, Ordering::Relaxed);
    check_ridge_args(design, targets, lambda)?;

    let d = design.rows();
    let mut gram = design.gram();
    if lambda > 0.0 {
        for i in 0..d {
            let v = gram.get(i, i) + lambda;
            gram.set(i, i, v);
        }
    }
    let rhs = targets.mul_transpose(design); // m x d

    if let Some(chol) = cholesky_factor(&gram) {
        let m = targets.rows();
        let mut w = DenseMatrix::zeros(m, d);
        let mut x = vec![0.0; d];
        for i in 0..m {
            cholesky_solve(&chol, rhs.row(i), &mut x);
            w.row_mut(i).copy_from_slice(&x);
        }
        if w.values().iter().all(|v| v.is_finite()) {
            return Ok(w);
        }
    }
    qr_solve(design, targets, lambda)
}

/// Same minimization as [`solve_regularized_ls`] computed purely through a
/// Householder QR factorization of the stacked system [Z^T; sqrt(lambda) I].
pub fn solve_regularized_ls_qr(
    design: &DenseMatrix,
    targets: &DenseMatrix,
    lambda: f64,
) -> Result<DenseMatrix> {
    SOLVER_CALLS.fetch_add(1, Ordering::Relaxed);
    check_ridge_args(design, targets, lambda)?;
    qr_solve(design, targets, lambda)
}

fn check_ridge_args(design: &DenseMatrix, targets: &DenseMatrix, lambda: f64) -> Result<()> {
    if design.cols() != targets.cols() {
        return Err(Error::DimensionMismatch(format!(
            "design has {} columns but targets has {}",
            design.cols(),
            targets.cols()
        )));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "ridge parameter must be finite and nonnegative, got {lambda}"
        )));
    }
    Ok(())
}

/// Lower-triangular factor of a symmetric positive definite matrix, or None
/// when a pivot falls below the scaled floor.
fn cholesky_factor(g: &DenseMatrix) -> Option<Vec<f64>> {
    let n = g.rows();
    let mut max_diag = 0.0f64;
    for i in 0..n {
        max_diag = max_diag.max(g.get(i, i));
    }
    let floor = max_diag * n as f64 * f64::EPSILON;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut diag = g.get(j, j);
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        // NaN must fail this gate too, so test for "not above" rather
        // than "below or equal"
        if diag.partial_cmp(&floor) != Some(std::cmp::Ordering::Greater) {
            return None;
        }
        let ljj = diag.sqrt();
        l[j * n + j] = ljj;
        for i in j + 1..n {
            let mut v = g.get(i, j);
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = v / ljj;
        }
    }
    Some(l)
}

/// Solves L L^T x = b.
fn cholesky_solve(l: &[f64], b: &[f64], x: &mut [f64]) {
    let n = b.len();
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l[i * n + k] * x[k];
        }
        x[i] = v / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut v = x[i];
        for k in i + 1..n {
            v -= l[k * n + i] * x[k];
        }
        x[i] = v / l[i * n + i];
    }
}

/// Householder least squares on the stacked system. For lambda > 0 the
/// stack appends sqrt(lambda) I below Z^T, which keeps the factorization
/// full rank; for lambda = 0 a vanishing pivot means the system is singular.
fn qr_solve(design: &DenseMatrix, targets: &DenseMatrix, lambda: f64) -> Result<DenseMatrix> {
    let d = design.rows();
    let t = design.cols();
    let m = targets.rows();
    let extra = if lambda > 0.0 { d } else { 0 };
    let rows = t + extra;
    if rows < d {
        return Err(Error::SingularSystem);
    }

    // a = [Z^T; sqrt(lambda) I], b = [Y^T; 0]
    let mut a = vec![0.0; rows * d];
    for i in 0..t {
        for j in 0..d {
            a[i * d + j] = design.get(j, i);
        }
    }
    if extra > 0 {
        let sl = lambda.sqrt();
        for j in 0..d {
            a[(t + j) * d + j] = sl;
        }
    }
    let mut b = vec![0.0; rows * m];
    for i in 0..t {
        for j in 0..m {
            b[i * m + j] = targets.get(j, i);
        }
    }

    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let pivot_floor = scale * rows as f64 * f64::EPSILON;

    for k in 0..d {
        let mut col_norm = 0.0;
        for i in k..rows {
            col_norm += a[i * d + k] * a[i * d + k];
        }
        let col_norm = col_norm.sqrt();
        // NaN must fail this gate too, so test for "not above" rather
        // than "below or equal"
        if col_norm.partial_cmp(&pivot_floor) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::SingularSystem);
        }
        let akk = a[k * d + k];
        let alpha = if akk >= 0.0 { -col_norm } else { col_norm };
        // Householder direction u = x - alpha e_k, stored in place below the pivot.
        let u0 = akk - alpha;
        let mut unorm2 = u0 * u0;
        for i in k + 1..rows {
            unorm2 += a[i * d + k] * a[i * d + k];
        }
        if unorm2 == 0.0 {
            continue; // column already reduced
        }
        a[k * d + k] = u0;
        for j in k + 1..d {
            let mut proj = 0.0;
            for i in k..rows {
                proj += a[i * d + k] * a[i * d + j];
            }
            let f = 2.0 * proj / unorm2;
            for i in k..rows {
                a[i * d + j] -= f * a[i * d + k];
            }
        }
        for j in 0..m {
            let mut proj = 0.0;
            for i in k..rows {
                proj += a[i * d + k] * b[i * m + j];
            }
            let f = 2.0 * proj / unorm2;
            for i in k..rows {
                b[i * m + j] -= f * a[i * d + k];
            }
        }
        a[k * d + k] = alpha;
    }

    // Back substitution on the upper triangle, one target row at a time.
    let mut w = DenseMatrix::zeros(m, d);
    for j in 0..m {
        for i in (0..d).rev() {
            let mut v = b[i * m + j];
            for k in i + 1..d {
                v -= a[i * d + k] * w.get(j, k);
            }
            let r = a[i * d + i];
            if r.abs() <= pivot_floor {
                return Err(Error::SingularSystem);
            }
            w.set(j, i, v / r);
        }
    }
    if !w.values().iter().all(|v| v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(w)
}
