//! Small dense symmetric linear algebra, row-major `n x n`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, sqrt};

/// In-place Cholesky factor `A = L L^T`; lower triangle of `a` receives `L`.
/// Returns `false` if a pivot is not strictly positive.
pub fn cholesky(a: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for p in 0..j {
            d -= a[j * n + p] * a[j * n + p];
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let ljj = sqrt(d);
        a[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for p in 0..j {
                s -= a[i * n + p] * a[j * n + p];
            }
            a[i * n + j] = s / ljj;
        }
    }
    true
}

/// Solves `L L^T x = b` given the factor from [`cholesky`].
pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for p in 0..i {
            s -= l[i * n + p] * y[p];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for p in (i + 1)..n {
            s -= l[p * n + i] * x[p];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

/// Solves `H x = b` for symmetric `H`, adding a growing multiple of the
/// identity until the factorization succeeds.
pub fn solve_regularized(h: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let scale = (0..n).map(|i| abs(h[i * n + i])).fold(0.0, f64::max).max(1e-300);
    let mut shift = 0.0;
    for _ in 0..40 {
        let mut a = h.to_vec();
        for i in 0..n {
            a[i * n + i] += shift;
        }
        if cholesky(&mut a, n) {
            let x = cholesky_solve(&a, n, b);
            if x.iter().all(|v| v.is_finite()) {
                return Some(x);
            }
        }
        shift = if shift == 0.0 { 1e-12 * scale } else { shift * 10.0 };
    }
    None
}
