use serde::{Deserialize, Serialize};

use crate::curve::{CurveGeometry, Frame};
use crate::error::{Error, Result};
use crate::geom::{bbox_diagonal, Vec2};

/// Homogeneous control point `(w x, w y, w)`.
pub(crate) type Hpoint = [f64; 3];

/// Which one-sided limit to take when a parameter sits on a knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A planar NURBS curve, clamped or periodic.
///
/// Periodic curves carry an unclamped knot vector whose spacing repeats with the
/// period, and `degree` wrapped control points at the end duplicating the first ones.
/// For both kinds the parameter domain is `[knots[degree], knots[n]]` with `n` the
/// number of control points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NurbsCurve {
    degree: usize,
    knots: Vec<f64>,
    control_points: Vec<Vec2>,
    weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    periodic: bool,
}

const WRAP_TOL: f64 = 1e-9;

impl NurbsCurve {
    /// Clamped rational curve.
    pub fn new(degree: usize, knots: Vec<f64>, control_points: Vec<Vec2>, weights: Vec<f64>) -> Result<Self> {
        let c = Self { degree, knots, control_points, weights, periodic: false };
        c.validate()?;
        Ok(c)
    }

    /// Curve from a full knot vector. A periodic curve carries the wrapped control points.
    pub fn from_knots(
        degree: usize,
        knots: Vec<f64>,
        control_points: Vec<Vec2>,
        weights: Vec<f64>,
        periodic: bool,
    ) -> Result<Self> {
        let c = Self { degree, knots, control_points, weights, periodic };
        c.validate()?;
        Ok(c)
    }

    /// Clamped polynomial curve (all weights 1).
    pub fn polynomial(degree: usize, knots: Vec<f64>, control_points: Vec<Vec2>) -> Result<Self> {
        let w = vec![1.0; control_points.len()];
        Self::new(degree, knots, control_points, w)
    }

    /// Periodic curve over spans `breaks[0] < ... < breaks[N]` with `N` unique control points.
    pub fn periodic(degree: usize, breaks: &[f64], control_points: Vec<Vec2>, weights: Vec<f64>) -> Result<Self> {
        let spans = breaks.len().saturating_sub(1);
        if spans < 2 || control_points.len() != spans || weights.len() != spans {
            return Err(Error::InvalidInput(format!(
                "periodic curve needs {spans} unique control points and weights for {spans} spans"
            )));
        }
        let knots = periodic_knots(degree, breaks);
        let mut cps = control_points;
        let mut ws = weights;
        for i in 0..degree {
            cps.push(cps[i % spans]);
            ws.push(ws[i % spans]);
        }
        let c = Self { degree, knots, control_points: cps, weights: ws, periodic: true };
        c.validate()?;
        Ok(c)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn control_points(&self) -> &[Vec2] {
        &self.control_points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn is_rational(&self) -> bool {
        self.weights.iter().any(|&w| w != 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.degree;
        let n = self.control_points.len();
        let bad = |m: String| Err(Error::InvalidInput(m));
        if p < 1 {
            return bad("degree must be at least 1".into());
        }
        if n < p + 1 {
            return bad(format!("degree {p} needs at least {} control points, got {n}", p + 1));
        }
        if self.knots.len() != n + p + 1 {
            return bad(format!(
                "expected {} knots for {n} control points of degree {p}, got {}",
                n + p + 1,
                self.knots.len()
            ));
        }
        if self.weights.len() != n {
            return bad(format!("expected {n} weights, got {}", self.weights.len()));
        }
        if self.weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return bad("weights must be positive and finite".into());
        }
        if self.control_points.iter().any(|p| !p.is_finite()) {
            return bad("control points must be finite".into());
        }
        if self.knots.iter().any(|k| !k.is_finite()) || self.knots.windows(2).any(|w| w[1] < w[0]) {
            return bad("knot vector must be finite and non-decreasing".into());
        }
        let (lo, hi) = (self.knots[p], self.knots[n]);
        if !(hi > lo) {
            return bad("knot vector has an empty parameter domain".into());
        }
        let mut i = p + 1;
        while i < n {
            let k = self.knots[i];
            let m = self.knots.iter().filter(|&&x| x == k).count();
            if k > lo && k < hi && m > p {
                return bad(format!("interior knot {k} has multiplicity {m} > degree {p}"));
            }
            i += 1;
        }
        if self.periodic {
            let spans = n - p;
            for i in 0..p {
                let j = spans + i;
                if self.control_points[i].distance(self.control_points[j])
                    > WRAP_TOL * (1.0 + self.control_points[i].norm())
                    || (self.weights[i] - self.weights[j]).abs() > WRAP_TOL * self.weights[i]
                {
                    return bad(format!("periodic control point {j} does not wrap onto {i}"));
                }
            }
            let period = hi - lo;
            for i in 0..self.knots.len() - spans - 1 {
                let d0 = self.knots[i + 1] - self.knots[i];
                let d1 = self.knots[i + spans + 1] - self.knots[i + spans];
                if (d0 - d1).abs() > WRAP_TOL * period {
                    return bad("periodic knot spacing does not repeat".into());
                }
            }
        } else {
            let first = &self.knots[..=p];
            let last = &self.knots[n..];
            if first.iter().any(|&k| k != lo) || last.iter().any(|&k| k != hi) {
                return bad("knot vector must be clamped (end multiplicity degree + 1) unless periodic".into());
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[self.degree], self.knots[self.control_points.len()])
    }

    /// Distinct knot values in the domain; consecutive pairs bound the segments.
    pub fn segment_breaks(&self) -> Vec<f64> {
        let (lo, hi) = self.domain();
        let mut out: Vec<f64> = Vec::new();
        for &k in &self.knots {
            if k >= lo && k <= hi && out.last() != Some(&k) {
                out.push(k);
            }
        }
        out
    }

    /// Number of non-empty knot spans in the domain.
    pub fn segment_count(&self) -> usize {
        self.segment_breaks().len() - 1
    }

    pub(crate) fn homogeneous(&self) -> Vec<Hpoint> {
        self.control_points.iter().zip(&self.weights).map(|(p, &w)| [p.x * w, p.y * w, w]).collect()
    }

    pub(crate) fn from_homogeneous(degree: usize, knots: Vec<f64>, pw: &[Hpoint], periodic: bool) -> Self {
        let control_points = pw.iter().map(|h| Vec2::new(h[0] / h[2], h[1] / h[2])).collect();
        let weights = pw.iter().map(|h| h[2]).collect();
        Self { degree, knots, control_points, weights, periodic }
    }

    fn check_param(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        let slack = 1e-12 * (hi - lo);
        if t >= lo && t <= hi {
            Ok(t)
        } else if t >= lo - slack && t <= hi + slack {
            Ok(t.clamp(lo, hi))
        } else {
            Err(Error::ParameterOutOfRange { t, lo, hi })
        }
    }

    pub(crate) fn find_span(&self, t: f64, side: Side) -> usize {
        find_span(&self.knots, self.degree, self.control_points.len(), t, side)
    }

    /// Homogeneous derivatives `A^(k)` (x, y part and weight) for `k = 0..=order`.
    fn homogeneous_derivs(&self, t: f64, order: usize, side: Side) -> Vec<Hpoint> {
        let p = self.degree;
        let span = self.find_span(t, side);
        let ders = basis_derivs(&self.knots, span, t, p, order.min(p));
        let mut out = vec![[0.0; 3]; order + 1];
        for (k, row) in ders.iter().enumerate() {
            for (j, &b) in row.iter().enumerate() {
                let idx = span - p + j;
                let w = self.weights[idx];
                let cp = self.control_points[idx];
                out[k][0] += b * w * cp.x;
                out[k][1] += b * w * cp.y;
                out[k][2] += b * w;
            }
        }
        out
    }

    /// Derivatives of orders `0..=order` taking the given one-sided limit at knots.
    pub fn derivatives_sided(&self, t: f64, order: usize, side: Side) -> Result<Vec<Vec2>> {
        let t = self.check_param(t)?;
        let a = self.homogeneous_derivs(t, order, side);
        let mut c: Vec<Vec2> = Vec::with_capacity(order + 1);
        let w0 = a[0][2];
        for k in 0..=order {
            let mut v = Vec2::new(a[k][0], a[k][1]);
            let mut binom = 1.0;
            for i in 1..=k {
                binom = binom * (k - i + 1) as f64 / i as f64;
                v -= c[k - i] * (binom * a[i][2]);
            }
            c.push(v / w0);
        }
        Ok(c)
    }

    /// Point and derivatives up to `order` (at most 3).
    pub fn derivatives(&self, t: f64, order: usize) -> Result<Vec<Vec2>> {
        if order > 3 {
            return Err(Error::InvalidInput(format!("derivative order {order} > 3; use derivatives_sided")));
        }
        self.derivatives_sided(t, order, Side::Right)
    }

    pub fn evaluate(&self, t: f64) -> Result<Vec2> {
        Ok(self.derivatives_sided(t, 0, Side::Right)?[0])
    }

    pub(crate) fn evaluate_homogeneous(&self, t: f64) -> Result<Hpoint> {
        let t = self.check_param(t)?;
        Ok(self.homogeneous_derivs(t, 0, Side::Right)[0])
    }

    /// Knot multiplicity of `u`.
    pub fn multiplicity(&self, u: f64) -> usize {
        self.knots.iter().filter(|&&k| k == u).count()
    }

    /// Inserts `u` so that it appears `times` more often (final multiplicity must stay <= degree + 1).
    pub fn insert_knot(&self, u: f64, times: usize) -> Result<NurbsCurve> {
        let u = self.check_param(u)?;
        if times == 0 {
            return Ok(self.clone());
        }
        let p = self.degree;
        let s = self.multiplicity(u);
        if s + times > p + 1 {
            return Err(Error::InvalidInput(format!("knot {u} multiplicity would exceed degree + 1")));
        }
        let mut cur = self.clone();
        // insert one at a time so the end-of-domain case (s = p + 1 allowed) stays simple
        for _ in 0..times {
            cur = cur.insert_once(u)?;
        }
        Ok(cur)
    }

    fn insert_once(&self, u: f64) -> Result<NurbsCurve> {
        let p = self.degree;
        let pw = self.homogeneous();
        let up = &self.knots;
        let n = pw.len();
        // span in the full knot vector with up[k] <= u < up[k + 1]
        let k = up.partition_point(|&x| x <= u) - 1;
        let s = up.iter().filter(|&&x| x == u).count();
        if s > p {
            return Err(Error::InvalidInput(format!("knot {u} already has full multiplicity")));
        }
        // single insertion: Q_i = a_i P_i + (1 - a_i) P_{i-1}
        let mut q = Vec::with_capacity(n + 1);
        for i in 0..=n {
            if i + p <= k {
                q.push(pw[i]);
            } else if i > k - s {
                // i >= k - s + 1
                q.push(pw[i - 1]);
            } else {
                let denom = up[i + p] - up[i];
                let a = if denom > 0.0 { (u - up[i]) / denom } else { 0.0 };
                let mut h = [0.0; 3];
                for c in 0..3 {
                    h[c] = a * pw[i][c] + (1.0 - a) * pw[i - 1][c];
                }
                q.push(h);
            }
        }
        let mut knots = Vec::with_capacity(up.len() + 1);
        knots.extend_from_slice(&up[..=k]);
        knots.push(u);
        knots.extend_from_slice(&up[k + 1..]);
        Ok(NurbsCurve::from_homogeneous(p, knots, &q, false))
    }

    /// Applies an affine map to the control points.
    pub fn map_points(&self, f: impl Fn(Vec2) -> Vec2) -> NurbsCurve {
        let mut c = self.clone();
        c.control_points = c.control_points.iter().map(|&p| f(p)).collect();
        c
    }

    /// Control points multiplied by `s`.
    pub fn scaled(&self, s: f64) -> NurbsCurve {
        self.map_points(|p| p * s)
    }

    fn size(&self) -> f64 {
        bbox_diagonal(self.control_points.iter().copied())
    }
}

/// Span index `s` in `[p, n - 1]` containing `t`, skipping empty spans; `Right` takes
/// `knots[s] <= t < knots[s + 1]`, `Left` takes `knots[s] < t <= knots[s + 1]`.
pub(crate) fn find_span(knots: &[f64], p: usize, n: usize, t: f64, side: Side) -> usize {
    let knots = &knots[..=n];
    let empty = |s: usize| knots[s] == knots[s + 1];
    match side {
        Side::Right => {
            let mut s = knots.partition_point(|&k| k <= t).saturating_sub(1).clamp(p, n - 1);
            while empty(s) && s > p {
                s -= 1;
            }
            s
        }
        Side::Left => {
            let mut s = knots.partition_point(|&k| k < t).saturating_sub(1).clamp(p, n - 1);
            while empty(s) && s < n - 1 {
                s += 1;
            }
            s
        }
    }
}

/// Knot vector of a periodic curve of `degree` over the given span breaks.
pub(crate) fn periodic_knots(degree: usize, breaks: &[f64]) -> Vec<f64> {
    let spans = breaks.len() - 1;
    let period = breaks[spans] - breaks[0];
    let count = spans + 2 * degree + 1;
    (0..count)
        .map(|k| {
            let i = k as i64 - degree as i64;
            let q = i.div_euclid(spans as i64);
            let r = i.rem_euclid(spans as i64) as usize;
            breaks[r] + period * q as f64
        })
        .collect()
}

/// B-spline basis function derivatives (rows = derivative order, columns = the `p + 1`
/// non-zero functions on `span`).
pub(crate) fn basis_derivs(knots: &[f64], span: usize, t: f64, p: usize, order: usize) -> Vec<Vec<f64>> {
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let mut ders = vec![vec![0.0; p + 1]; order + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=order {
            let mut d = 0.0;
            let rk = r as i64 - k as i64;
            let pk = p - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if (r as i64 - 1) <= pk as i64 { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as i64) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r as i64 <= pk as i64 {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for k in 1..=order {
        for v in ders[k].iter_mut() {
            *v *= factor;
        }
        factor *= (p - k) as f64;
    }
    ders
}

impl CurveGeometry for NurbsCurve {
    fn domain(&self) -> (f64, f64) {
        NurbsCurve::domain(self)
    }

    fn frame(&self, t: f64) -> Result<Frame> {
        let d = self.derivatives_sided(t, 3, Side::Right)?;
        Ok(Frame { point: d[0], d1: d[1], d2: d[2], d3: d[3] })
    }

    fn point(&self, t: f64) -> Result<Vec2> {
        self.evaluate(t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.segment_breaks()
    }

    fn is_closed(&self) -> bool {
        if self.periodic {
            return true;
        }
        let (lo, hi) = self.domain();
        let (Ok(a), Ok(b)) = (self.derivatives_sided(lo, 1, Side::Right), self.derivatives_sided(hi, 1, Side::Left))
        else {
            return false;
        };
        let tol = 1e-9 * self.size().max(f64::MIN_POSITIVE);
        match (a[1].normalized(), b[1].normalized()) {
            (Some(ta), Some(tb)) => a[0].distance(b[0]) <= tol && ta.distance(tb) <= 1e-9,
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    pub(crate) fn quarter_circle() -> NurbsCurve {
        NurbsCurve::new(
            2,
            vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
            vec![Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)],
            vec![1.0, FRAC_1_SQRT_2, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn clamped_start_is_first_control_point() {
        let c = quarter_circle();
        assert_eq!(c.evaluate(0.0).unwrap(), Vec2::new(1.0, 0.0));
        assert!(c.evaluate(1.0).unwrap().distance(Vec2::new(0.0, 1.0)) < 1e-15);
    }

    #[test]
    fn rational_quadratic_lies_on_circle() {
        let c = quarter_circle();
        for i in 0..=20 {
            let p = c.evaluate(i as f64 / 20.0).unwrap();
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_midpoint() {
        let c = NurbsCurve::polynomial(1, vec![0.0, 0.0, 1.0, 1.0], vec![Vec2::new(0.0, 0.0), Vec2::new(2.0, 4.0)])
            .unwrap();
        assert_eq!(c.evaluate(0.5).unwrap(), Vec2::new(1.0, 2.0));
    }

    #[test]
    fn out_of_range_is_an_error() {
        let c = quarter_circle();
        assert!(matches!(c.evaluate(1.5), Err(Error::ParameterOutOfRange { .. })));
        assert!(c.evaluate(-0.01).is_err());
    }

    #[test]
    fn validation_rejects_bad_curves() {
        let cps = vec![Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(2.0, 1.0)];
        assert!(NurbsCurve::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0], cps.clone(), vec![1.0, -1.0, 1.0]).is_err());
        assert!(NurbsCurve::new(2, vec![0.0, 0.0, 1.0, 1.0, 1.0], cps.clone(), vec![1.0; 3]).is_err());
        assert!(NurbsCurve::new(2, vec![0.0, 0.0, 0.5, 0.2, 1.0, 1.0], cps, vec![1.0; 3]).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let c = quarter_circle();
        let t = 0.37;
        let h = 1e-6;
        let d = c.derivatives(t, 3).unwrap();
        let dp = c.derivatives(t + h, 2).unwrap();
        let dm = c.derivatives(t - h, 2).unwrap();
        for k in 0..3 {
            let fd = (dp[k] - dm[k]) / (2.0 * h);
            assert!(fd.distance(d[k + 1]) < 1e-6 * (1.0 + d[k + 1].norm()), "order {}", k + 1);
        }
    }

    #[test]
    fn knot_insertion_preserves_shape() {
        let c = quarter_circle();
        let d = c.insert_knot(0.3, 2).unwrap();
        assert_eq!(d.control_points().len(), 5);
        for i in 0..=50 {
            let t = i as f64 / 50.0;
            assert!(c.evaluate(t).unwrap().distance(d.evaluate(t).unwrap()) < 1e-14);
        }
    }

    #[test]
    fn periodic_knots_repeat() {
        let k = periodic_knots(3, &[0.0, 1.0, 3.0, 4.0]);
        assert_eq!(k, vec![-4.0, -3.0, -1.0, 0.0, 1.0, 3.0, 4.0, 5.0, 7.0, 8.0]);
    }
}
