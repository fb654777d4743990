use crate::error::AllocError;

/// Root of a nonincreasing `f` on `[lo, hi]`.
///
/// Returns `lo` if `f(lo) <= 0`, `hi` if `f(hi) >= 0`, and otherwise a point
/// inside a bracket of width at most `tol`.
pub fn bisect_decreasing<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, AllocError> {
    if !(lo < hi) {
        return Err(AllocError::EmptyInterval { lo, hi });
    }
    if f(lo) <= 0.0 {
        return Ok(lo);
    }
    if f(hi) >= 0.0 {
        return Ok(hi);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
