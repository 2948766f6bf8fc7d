use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Finds a root of `f` in `[a, b]` given `f(a) * f(b) <= 0`.
///
/// Secant steps are taken when they land strictly inside the bracket; every other
/// step is a bisection so the bracket width at least halves every two iterations.
/// Returns once the bracket is narrower than `tol` or an exact zero is hit.
pub fn bracket_root<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("root tolerance must be positive, got {tol}")));
    }
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if !(flo.is_finite() && fhi.is_finite()) {
        return Err(Error::Domain(format!("non-finite function value on bracket [{lo}, {hi}]")));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoSignChange { a: lo, b: hi, fa: flo, fb: fhi });
    }

    for iter in 0..MAX_ITER {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let mut x = mid;
        if iter % 2 == 0 {
            let s = hi - fhi * (hi - lo) / (fhi - flo);
            if s > lo && s < hi && s.is_finite() {
                x = s;
            }
        }
        if x <= lo || x >= hi {
            // bracket is at floating point resolution
            break;
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::Domain(format!("non-finite function value at {x}")));
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
    }
    // return the endpoint with the smaller residual
    Ok(if flo.abs() <= fhi.abs() { lo } else { hi })
}
