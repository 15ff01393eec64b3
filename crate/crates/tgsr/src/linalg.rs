//! Dense symmetric-positive-definite solves used by the ridge update.
//!
//! The regression update solves `(mu*I + 2*X*X^T) D = B` with `X` of shape
//! `(K*d) x n`. Two mathematically identical routes are provided:
//!
//! * [`ridge_solve_direct`] forms the `(K*d)^2` system and factors it. Fine
//!   when `K*d` is small; hopeless at `K*d ~ 15_000`.
//! * [`ridge_solve_reduced`] applies the matrix-inversion identity
//!   `(mu*I + 2*X*X^T)^{-1} B = (B - X*(mu/2*I + X^T*X)^{-1}*(X^T*B)) / mu`
//!   so only an `n x n` system is factored.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Cholesky factorization A = L*L^T of a symmetric positive definite matrix.
/// Returns the lower triangle L.
pub fn cholesky(a: &ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "cholesky needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag.is_finite() && diag > 0.0) {
            return Err(Error::InvalidInput(format!(
                "matrix is not positive definite (pivot {} = {diag:e})",
                j
            )));
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Solve L*L^T * X = B for every column of B given the Cholesky factor L.
pub fn cholesky_solve(l: &Array2<f64>, b: &ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = l.nrows();
    if b.nrows() != n {
        return Err(Error::ShapeMismatch(format!(
            "cholesky_solve: factor is {}x{} but rhs has {} rows",
            n,
            n,
            b.nrows()
        )));
    }
    let mut x = b.to_owned();
    let ncols = x.ncols();
    for c in 0..ncols {
        // forward substitution L*y = b
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
        // back substitution L^T*x = y
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in (i + 1)..n {
                s -= l[(k, i)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    Ok(x)
}

/// Solve `(mu*I + 2*X*X^T) out = b` by forming the full system.
pub fn ridge_solve_direct(
    x: &ArrayView2<f64>,
    b: &ArrayView2<f64>,
    mu: f64,
) -> Result<Array2<f64>> {
    let p = x.nrows();
    let mut system = x.dot(&x.t()) * 2.0;
    for i in 0..p {
        system[(i, i)] += mu;
    }
    let l = cholesky(&system.view())?;
    cholesky_solve(&l, b)
}

/// Solve `(mu*I + 2*X*X^T) out = b` through the reduced `n x n` system,
/// given the precomputed Gram matrix `gram = X^T*X`.
pub fn ridge_solve_reduced(
    x: &ArrayView2<f64>,
    gram: &ArrayView2<f64>,
    b: &ArrayView2<f64>,
    mu: f64,
) -> Result<Array2<f64>> {
    let n = x.ncols();
    if gram.nrows() != n || gram.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "gram must be {n}x{n}, got {}x{}",
            gram.nrows(),
            gram.ncols()
        )));
    }
    let mut inner = gram.to_owned();
    for i in 0..n {
        inner[(i, i)] += 0.5 * mu;
    }
    let l = cholesky(&inner.view())?;
    let xtb = x.t().dot(b);
    let y = cholesky_solve(&l, &xtb.view())?;
    Ok((b - &x.dot(&y)) / mu)
}
