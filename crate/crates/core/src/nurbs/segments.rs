//! Segment extraction and open/closed conversion.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::curve::{NurbsCurve, Side};
use super::fit::SplineSpace;
use crate::error::{Error, Result};
use crate::geom::{bbox_diagonal, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Open,
    Closed,
}

/// Relative endpoint gap accepted when closing a curve.
pub const DEFAULT_SNAP_TOL: f64 = 1e-6;

/// Sub-curve over knot spans `start .. start + count`, as a clamped curve on the original parameters.
pub fn extract_segments(curve: &NurbsCurve, start: usize, count: usize) -> Result<NurbsCurve> {
    let breaks = curve.segment_breaks();
    let total = breaks.len() - 1;
    if count == 0 || start + count > total {
        return Err(Error::SegmentRange { start, count, total });
    }
    let p = curve.degree();
    let (ua, ub) = (breaks[start], breaks[start + count]);
    let mut c = curve.clone();
    for u in [ua, ub] {
        let m = c.multiplicity(u);
        if m < p {
            c = c.insert_knot(u, p - m)?;
        }
    }
    let knots = c.knots();
    let fa = knots.iter().position(|&k| k == ua).expect("inserted knot");
    let ma = c.multiplicity(ua);
    let fb = knots.iter().position(|&k| k == ub).expect("inserted knot");
    let first = fa + ma - p - 1;
    let last = fb - 1;
    let mut new_knots = vec![ua; p + 1];
    new_knots.extend(knots.iter().copied().filter(|&k| k > ua && k < ub));
    new_knots.extend(std::iter::repeat_n(ub, p + 1));
    NurbsCurve::new(p, new_knots, c.control_points()[first..=last].to_vec(), c.weights()[first..=last].to_vec())
}

/// Converts between clamped (open) and periodic (closed) representations using the default snap tolerance.
pub fn set_topology(curve: &NurbsCurve, to: Topology) -> Result<NurbsCurve> {
    let tol = DEFAULT_SNAP_TOL * bbox_diagonal(curve.control_points().iter().copied()).max(f64::MIN_POSITIVE);
    set_topology_with_tol(curve, to, tol)
}

/// As [`set_topology`] with an absolute snap tolerance for closing.
///
/// Opening a periodic curve is exact. Closing refits the curve as a periodic spline of the
/// same degree on the same span breaks (least squares in homogeneous coordinates).
pub fn set_topology_with_tol(curve: &NurbsCurve, to: Topology, snap_tol: f64) -> Result<NurbsCurve> {
    match to {
        Topology::Open if curve.is_periodic() => extract_segments(curve, 0, curve.segment_count()),
        Topology::Open => Ok(curve.clone()),
        Topology::Closed if curve.is_periodic() => Ok(curve.clone()),
        Topology::Closed => close(curve, snap_tol),
    }
}

fn close(curve: &NurbsCurve, snap_tol: f64) -> Result<NurbsCurve> {
    let (lo, hi) = curve.domain();
    let gap = curve.evaluate(lo)?.distance(curve.evaluate(hi)?);
    if !(gap <= snap_tol) {
        return Err(Error::EndpointGap { gap, tol: snap_tol });
    }
    let p = curve.degree();
    let fit_tol = CLOSE_FIT_TOL * bbox_diagonal(curve.control_points().iter().copied());
    let mut breaks = curve.segment_breaks();
    while breaks.len() - 1 < p + 1 {
        breaks = refine(&breaks);
    }
    let mut level = 0;
    loop {
        let (fitted, err) = periodic_fit(curve, &breaks)?;
        if err <= fit_tol || level == MAX_REFINEMENTS {
            return Ok(fitted);
        }
        breaks = refine(&breaks);
        level += 1;
    }
}

/// Closing refines the span breaks until the periodic fit is within this fraction of the size.
const CLOSE_FIT_TOL: f64 = 1e-9;
const MAX_REFINEMENTS: usize = 4;

fn refine(breaks: &[f64]) -> Vec<f64> {
    let mut refined = Vec::with_capacity(2 * breaks.len());
    for w in breaks.windows(2) {
        refined.push(w[0]);
        refined.push(0.5 * (w[0] + w[1]));
    }
    refined.push(*breaks.last().unwrap());
    refined
}

/// Least-squares periodic fit on `breaks` and its largest sampled deviation from `curve`.
fn periodic_fit(curve: &NurbsCurve, breaks: &[f64]) -> Result<(NurbsCurve, f64)> {
    let p = curve.degree();
    let space = SplineSpace::periodic(p, breaks);
    let per_span = p + 3;
    let mut rows = Vec::new();
    for w in breaks.windows(2) {
        for j in 0..per_span {
            rows.push(w[0] + (w[1] - w[0]) * (j as f64 + 0.5) / per_span as f64);
        }
    }
    let n = space.n_free;
    let mut a = DMatrix::zeros(rows.len(), n);
    let mut b = DMatrix::zeros(rows.len(), 3);
    for (r, &t) in rows.iter().enumerate() {
        let row = space.basis(t, 0, Side::Right);
        for (j, &i) in row.indices.iter().enumerate() {
            a[(r, i)] += row.values[0][j];
        }
        let h = curve.evaluate_homogeneous(t)?;
        for c in 0..3 {
            b[(r, c)] = h[c];
        }
    }
    let sol = a.svd(true, true).solve(&b, 1e-14).map_err(|e| Error::SingularSystem(e.to_string()))?;
    let mut pts = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for i in 0..n {
        let w = sol[(i, 2)];
        if !(w > 0.0) {
            return Err(Error::SingularSystem("closing fit produced a non-positive weight".into()));
        }
        pts.push(Vec2::new(sol[(i, 0)] / w, sol[(i, 1)] / w));
        ws.push(w);
    }
    let fitted = NurbsCurve::periodic(p, breaks, pts, ws)?;
    let mut err = 0.0f64;
    for w in breaks.windows(2) {
        for j in 0..=4 {
            let t = w[0] + (w[1] - w[0]) * j as f64 / 4.0;
            err = err.max(fitted.evaluate(t)?.distance(curve.evaluate(t)?));
        }
    }
    Ok((fitted, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveGeometry;

    fn unit_circle() -> NurbsCurve {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let pts = vec![
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(-1.0, 0.0),
            Vec2::new(-1.0, -1.0),
            Vec2::new(0.0, -1.0),
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 0.0),
        ];
        let w = vec![1.0, h, 1.0, h, 1.0, h, 1.0, h, 1.0];
        let knots = vec![0.0, 0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0, 4.0];
        NurbsCurve::new(2, knots, pts, w).unwrap()
    }

    fn wiggly() -> NurbsCurve {
        let pts: Vec<Vec2> = (0..13).map(|i| Vec2::new(i as f64, ((i * 7) % 5) as f64 - 2.0)).collect();
        let w: Vec<f64> = (0..13).map(|i| 1.0 + 0.1 * (i % 3) as f64).collect();
        let mut knots = vec![0.0; 4];
        knots.extend((1..10).map(|i| i as f64));
        knots.extend(vec![10.0; 4]);
        NurbsCurve::new(3, knots, pts, w).unwrap()
    }

    #[test]
    fn full_range_extract_is_identity() {
        let c = wiggly();
        let e = extract_segments(&c, 0, c.segment_count()).unwrap();
        for i in 0..100 {
            let t = 10.0 * i as f64 / 99.0;
            assert!(c.evaluate(t).unwrap().distance(e.evaluate(t).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn extract_composes() {
        let c = wiggly();
        let direct = extract_segments(&c, 2, 3).unwrap();
        let outer = extract_segments(&c, 1, 6).unwrap();
        let nested = extract_segments(&outer, 1, 3).unwrap();
        assert_eq!(direct.domain(), (2.0, 5.0));
        for i in 0..=50 {
            let t = 2.0 + 3.0 * i as f64 / 50.0;
            let d = direct.evaluate(t).unwrap();
            assert!(d.distance(nested.evaluate(t).unwrap()) < 1e-12);
            assert!(d.distance(c.evaluate(t).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn bad_range_rejected() {
        let c = wiggly();
        assert!(matches!(extract_segments(&c, 8, 3), Err(Error::SegmentRange { total: 10, .. })));
        assert!(extract_segments(&c, 0, 0).is_err());
    }

    #[test]
    fn close_then_open_circle() {
        let c = unit_circle();
        let closed = set_topology(&c, Topology::Closed).unwrap();
        assert!(closed.is_periodic());
        for i in 0..=64 {
            let t = 4.0 * i as f64 / 64.0;
            let r = closed.evaluate(t).unwrap().norm();
            assert!((r - 1.0).abs() < 1e-4, "{r}");
        }
        let opened = set_topology(&closed, Topology::Open).unwrap();
        assert!(!opened.is_periodic());
        for i in 0..=64 {
            let t = 4.0 * i as f64 / 64.0;
            assert!(opened.evaluate(t).unwrap().distance(closed.evaluate(t).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn periodic_seam_is_smooth() {
        let pts: Vec<Vec2> = (0..8)
            .map(|i| Vec2::from_angle(i as f64 * std::f64::consts::FRAC_PI_4) * (1.0 + 0.2 * (i % 2) as f64))
            .collect();
        let breaks: Vec<f64> = (0..=8).map(|i| i as f64).collect();
        let c = NurbsCurve::periodic(5, &breaks, pts, vec![1.0; 8]).unwrap();
        let left = c.derivatives_sided(8.0, 4, Side::Left).unwrap();
        let right = c.derivatives_sided(0.0, 4, Side::Right).unwrap();
        for k in 0..=4 {
            assert!(left[k].distance(right[k]) < 1e-9, "order {k}");
        }
        assert!(c.is_closed());
    }

    #[test]
    fn gap_is_reported() {
        let c = NurbsCurve::polynomial(
            1,
            vec![0.0, 0.0, 1.0, 2.0, 2.0],
            vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.5, 0.0)],
        )
        .unwrap();
        match set_topology(&c, Topology::Closed) {
            Err(Error::EndpointGap { gap, .. }) => assert!((gap - 0.5).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }
}
