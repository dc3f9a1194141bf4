//! One-dimensional search routines for concave maximization and monotone roots.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Interval width below which `[lo, hi]` cannot be split further in `f64`.
fn resolution_floor(lo: f64, hi: f64) -> f64 {
    4.0 * f64::EPSILON * lo.abs().max(hi.abs())
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Returns `(argmax, max)` once the bracket is narrower than `tol`.
pub(crate) fn golden_section_max<F, E>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..400 {
        if hi - lo <= tol.max(resolution_floor(lo, hi)) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Smallest point (to `f64` resolution) of `[lo, hi]` where the non-decreasing
/// predicate turns true. Assumes `!pred(lo)` and `pred(hi)`.
pub(crate) fn bisect_threshold<F, E>(mut pred: F, mut lo: f64, mut hi: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<bool, E>,
{
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= resolution_floor(lo, hi) {
            break;
        }
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
