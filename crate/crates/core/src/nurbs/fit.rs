//! Polynomial spline spaces and linearly constrained quadratic fitting.
//!
//! Unknowns are the free control points laid out as `[x_0 .. x_{n-1}, y_0 .. y_{n-1}]`.

use nalgebra::{DMatrix, DVector};

use super::curve::{basis_derivs, find_span, periodic_knots, NurbsCurve, Side};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::numerics::kronrod15_rule;

/// Clamped or periodic polynomial spline space with simple interior knots.
#[derive(Debug, Clone)]
pub(crate) struct SplineSpace {
    pub degree: usize,
    pub breaks: Vec<f64>,
    pub knots: Vec<f64>,
    pub periodic: bool,
    /// Number of independent control points.
    pub n_free: usize,
}

/// Basis functions (or derivatives) that are non-zero at one parameter.
pub(crate) struct BasisRow {
    pub indices: Vec<usize>,
    /// `values[k][j]`: derivative order `k` of basis `indices[j]`.
    pub values: Vec<Vec<f64>>,
}

impl SplineSpace {
    pub fn clamped(degree: usize, breaks: &[f64]) -> Self {
        let spans = breaks.len() - 1;
        let mut knots = vec![breaks[0]; degree + 1];
        knots.extend_from_slice(&breaks[1..spans]);
        knots.extend(std::iter::repeat_n(breaks[spans], degree + 1));
        Self { degree, breaks: breaks.to_vec(), knots, periodic: false, n_free: spans + degree }
    }

    pub fn periodic(degree: usize, breaks: &[f64]) -> Self {
        let spans = breaks.len() - 1;
        Self { degree, breaks: breaks.to_vec(), knots: periodic_knots(degree, breaks), periodic: true, n_free: spans }
    }

    fn n_total(&self) -> usize {
        if self.periodic {
            self.n_free + self.degree
        } else {
            self.n_free
        }
    }

    pub fn unknowns(&self) -> usize {
        2 * self.n_free
    }

    pub fn basis(&self, t: f64, order: usize, side: Side) -> BasisRow {
        let p = self.degree;
        let span = find_span(&self.knots, p, self.n_total(), t, side);
        let d = basis_derivs(&self.knots, span, t, p, order.min(p));
        let mut values = d;
        while values.len() < order + 1 {
            values.push(vec![0.0; p + 1]);
        }
        let indices = (0..=p).map(|j| (span - p + j) % self.n_free).collect();
        BasisRow { indices, values }
    }

    /// Curve from free control points.
    pub fn curve(&self, free: &[Vec2]) -> Result<NurbsCurve> {
        if self.periodic {
            NurbsCurve::periodic(self.degree, &self.breaks, free.to_vec(), vec![1.0; free.len()])
        } else {
            NurbsCurve::polynomial(self.degree, self.knots.clone(), free.to_vec())
        }
    }

    pub fn curve_from_vector(&self, x: &DVector<f64>) -> Result<NurbsCurve> {
        let n = self.n_free;
        let pts: Vec<Vec2> = (0..n).map(|i| Vec2::new(x[i], x[n + i])).collect();
        self.curve(&pts)
    }

    /// Derivative of order `order` at `t` from the unknown vector.
    pub fn eval(&self, x: &DVector<f64>, t: f64, order: usize, side: Side) -> Vec2 {
        let row = self.basis(t, order, side);
        let n = self.n_free;
        let mut v = Vec2::ZERO;
        for (j, &i) in row.indices.iter().enumerate() {
            let b = row.values[order][j];
            v += Vec2::new(x[i], x[n + i]) * b;
        }
        v
    }
}

/// `1/2 x^T Q x - c^T x` subject to `A x = b`.
pub(crate) struct QuadraticProblem {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    rows: Vec<(Vec<(usize, f64)>, f64)>,
}

impl QuadraticProblem {
    pub fn new(unknowns: usize) -> Self {
        Self { q: DMatrix::zeros(unknowns, unknowns), c: DVector::zeros(unknowns), rows: Vec::new() }
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.rows.push((coeffs, rhs));
    }

    /// `C^(order)(t) = target`.
    pub fn constrain_value(&mut self, space: &SplineSpace, t: f64, order: usize, side: Side, target: Vec2) {
        let row = space.basis(t, order, side);
        let n = space.n_free;
        let coeffs_x: Vec<(usize, f64)> = row.indices.iter().zip(&row.values[order]).map(|(&i, &b)| (i, b)).collect();
        let coeffs_y = coeffs_x.iter().map(|&(i, b)| (n + i, b)).collect();
        self.add_constraint(coeffs_x, target.x);
        self.add_constraint(coeffs_y, target.y);
    }

    /// `C'(t)` parallel to `dir`.
    pub fn constrain_direction(&mut self, space: &SplineSpace, t: f64, dir: Vec2) {
        let row = space.basis(t, 1, Side::Right);
        let n = space.n_free;
        let mut coeffs = Vec::with_capacity(2 * row.indices.len());
        for (&i, &b) in row.indices.iter().zip(&row.values[1]) {
            coeffs.push((i, -dir.y * b));
            coeffs.push((n + i, dir.x * b));
        }
        self.add_constraint(coeffs, 0.0);
    }

    /// Adds `weight * |C^(order)(t) - target|^2`.
    pub fn add_target(&mut self, space: &SplineSpace, t: f64, order: usize, target: Vec2, weight: f64) {
        let row = space.basis(t, order, Side::Right);
        let n = space.n_free;
        for (a, &ia) in row.indices.iter().enumerate() {
            let ba = row.values[order][a];
            self.c[ia] += weight * ba * target.x;
            self.c[n + ia] += weight * ba * target.y;
            for (b, &ib) in row.indices.iter().enumerate() {
                let v = weight * ba * row.values[order][b];
                self.q[(ia, ib)] += v;
                self.q[(n + ia, n + ib)] += v;
            }
        }
    }

    /// Adds `weight * integral |C^(order)|^2 dt` over the whole domain.
    pub fn add_smoothing(&mut self, space: &SplineSpace, order: usize, weight: f64) {
        let n = space.n_free;
        for w in space.breaks.windows(2) {
            for (t, qw) in kronrod15_rule(w[0], w[1]) {
                let row = space.basis(t, order, Side::Right);
                for (a, &ia) in row.indices.iter().enumerate() {
                    for (b, &ib) in row.indices.iter().enumerate() {
                        let v = weight * qw * row.values[order][a] * row.values[order][b];
                        self.q[(ia, ib)] += v;
                        self.q[(n + ia, n + ib)] += v;
                    }
                }
            }
        }
    }

    pub fn constraint_matrix(&self) -> (DMatrix<f64>, DVector<f64>) {
        let m = self.rows.len();
        let n = self.c.len();
        let mut a = DMatrix::zeros(m, n);
        let mut b = DVector::zeros(m);
        for (r, (coeffs, rhs)) in self.rows.iter().enumerate() {
            for &(i, v) in coeffs {
                a[(r, i)] += v;
            }
            b[r] = *rhs;
        }
        (a, b)
    }

    /// Solves the KKT system.
    pub fn solve(&self) -> Result<DVector<f64>> {
        let n = self.c.len();
        let (a, b) = self.constraint_matrix();
        let m = a.nrows();
        let mut k = DMatrix::zeros(n + m, n + m);
        k.view_mut((0, 0), (n, n)).copy_from(&self.q);
        k.view_mut((0, n), (n, m)).copy_from(&a.transpose());
        k.view_mut((n, 0), (m, n)).copy_from(&a);
        let mut rhs = DVector::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&self.c);
        rhs.rows_mut(n, m).copy_from(&b);
        let scale = k.amax().max(f64::MIN_POSITIVE);
        let svd = k.svd(true, true);
        let smax = svd.singular_values.max();
        let rank = svd.singular_values.iter().filter(|&&s| s > 1e-13 * smax).count();
        if rank < n + m {
            return Err(Error::SingularSystem(format!(
                "constrained fit is rank deficient ({rank} of {}; scale {scale:e})",
                n + m
            )));
        }
        let sol = svd.solve(&rhs, 0.0).map_err(|e| Error::SingularSystem(e.to_string()))?;
        Ok(sol.rows(0, n).into_owned())
    }
}

/// Orthonormal basis of the null space of `a` (columns).
pub(crate) fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    let mut padded = DMatrix::zeros(n.max(a.nrows()), n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let smax = svd.singular_values.max().max(f64::MIN_POSITIVE);
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= 1e-11 * smax)
        .map(|(i, _)| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}
