//! Levenberg-Marquardt for sums of squares.

use nalgebra::{DMatrix, DVector};

pub(crate) struct Minimum {
    pub y: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
}

const LAMBDA_START: f64 = 1e-3;
const LAMBDA_MIN: f64 = 1e-12;
const LAMBDA_MAX: f64 = 1e16;
/// Consecutive accepted steps with relative progress below `STALL_TOL` that count as
/// convergence. Reparametrization directions leave a small gradient that is not worth chasing.
const STALL_LIMIT: usize = 5;
const STALL_TOL: f64 = 1e-10;

/// Minimizes `|r(y)|²` from a feasible `y0`. `eval` returns the residuals and their
/// Jacobian, or `None` outside the feasible set.
pub(crate) fn minimize<F>(mut eval: F, y0: DVector<f64>, max_iterations: usize, gradient_tol: f64) -> Option<Minimum>
where
    F: FnMut(&DVector<f64>) -> Option<(DVector<f64>, DMatrix<f64>)>,
{
    let (mut r, mut j) = eval(&y0)?;
    let mut y = y0;
    let n = y.len();
    if n == 0 {
        return Some(Minimum { y, iterations: 0, converged: true });
    }
    let mut cost = r.norm_squared();
    let mut lambda = LAMBDA_START;
    let mut stalled = 0;
    for it in 0..max_iterations {
        let g = j.tr_mul(&r);
        if 2.0 * g.amax() <= gradient_tol {
            return Some(Minimum { y, iterations: it, converged: true });
        }
        let h = j.tr_mul(&j);
        let floor = 1e-30 * h.diagonal().max().max(f64::MIN_POSITIVE);
        let accepted = loop {
            if lambda > LAMBDA_MAX {
                break None;
            }
            let mut a = h.clone();
            for i in 0..n {
                a[(i, i)] += lambda * h[(i, i)].max(floor);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let trial = &y - chol.solve(&g);
            match eval(&trial) {
                Some((rt, jt)) if rt.norm_squared() < cost => break Some((trial, rt, jt)),
                _ => lambda *= 4.0,
            }
        };
        let Some((yn, rn, jn)) = accepted else {
            return Some(Minimum { y, iterations: it, converged: true });
        };
        lambda = (lambda / 3.0).max(LAMBDA_MIN);
        let new_cost = rn.norm_squared();
        if cost - new_cost <= STALL_TOL * cost {
            stalled += 1;
        } else {
            stalled = 0;
        }
        y = yn;
        r = rn;
        j = jn;
        cost = new_cost;
        if stalled >= STALL_LIMIT {
            return Some(Minimum { y, iterations: it + 1, converged: true });
        }
    }
    let converged = 2.0 * j.tr_mul(&r).amax() <= gradient_tol;
    Some(Minimum { y, iterations: max_iterations, converged })
}
