//! Gauss hypergeometric function on the non-positive real axis.

use crate::error::{Error, Result};

/// Transformed arguments at or above this value are rejected; the series would need
/// far too many terms to reach full precision.
const MAX_TRANSFORMED_ARG: f64 = 1.0 - 1e-6;
const MAX_TERMS: usize = 200_000;
const TERM_RTOL: f64 = 1e-16;

fn is_nonpositive_integer(c: f64) -> bool {
    c <= 0.0 && c == c.round()
}

/// Power series of 2F1(a, b; c; w) for 0 <= w < 1, stopped once three consecutive
/// terms fall below `1e-16 * |sum|`.
fn series(a: f64, b: f64, c: f64, w: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut small_run = 0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * w;
        sum += term;
        if term.abs() <= TERM_RTOL * sum.abs() {
            small_run += 1;
            if small_run >= 3 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    sum
}

/// Finite sum of 2F1 when `a` or `b` is a non-positive integer. Summed in `z` directly;
/// the transformed polynomial would cancel badly for large |z|.
fn polynomial(a: f64, b: f64, c: f64, z: f64) -> Option<f64> {
    let n = [a, b].into_iter().filter(|&x| is_nonpositive_integer(x)).map(|x| -x).reduce(f64::min)?;
    let (mut sum, mut term) = (1.0, 1.0);
    for k in 0..n as usize {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
    }
    Some(sum)
}

/// 2F1(a, b; c; z) for z <= 0.
///
/// Terminating series are summed as polynomials. Otherwise uses the Pfaff transformation `2F1(a,b;c;z) = (1-z)^(-a) 2F1(a, c-b; c; z/(z-1))`
/// so the series argument lies in [0, 1).
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite()) || is_nonpositive_integer(c) {
        return Err(Error::HypergeometricDomain { c });
    }
    if !(z <= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("gauss_2f1 requires finite z <= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if let Some(v) = polynomial(a, b, c, z) {
        return Ok(v);
    }
    let w = z / (z - 1.0);
    if w >= MAX_TRANSFORMED_ARG {
        return Err(Error::HypergeometricPrecision { z, w });
    }
    Ok((1.0 - z).powf(-a) * series(a, c - b, c, w))
}
