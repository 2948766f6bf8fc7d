//! Curves from Hermite data: piecewise rational cubics (NURBzS) and high even degree B-splines.

use crate::analytic::HermiteTable;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::numerics::bracket_root;

use super::curve::{NurbsCurve, Side};
use super::fit::{QuadraticProblem, SplineSpace};

/// Node curvature residual allowed for B-spline templates, relative to the largest node curvature.
pub const CURVATURE_RESIDUAL_LIMIT: f64 = 0.02;

const CIRCLE_TOL: f64 = 1e-9;
const LEG_SAMPLES: usize = 300;
const WEIGHT_SAMPLES: usize = 25;
const W_MIN: f64 = 0.3;
const W_MAX: f64 = 3.0;
const GOLDEN_ITERATIONS: usize = 30;
const MONOTONE_SAMPLES: usize = 64;
const MONOTONE_TOL: f64 = 1e-7;

/// Segment data in a common form.
#[derive(Debug, Clone, Copy)]
struct SegmentData {
    p0: Vec2,
    p3: Vec2,
    t0: Vec2,
    t1: Vec2,
    k0: f64,
    k1: f64,
    length: f64,
}

/// Rational cubic Bézier with weights `(1, w, w, 1)`.
#[derive(Debug, Clone, Copy)]
struct RationalCubic {
    pts: [Vec2; 4],
    w: f64,
}

impl RationalCubic {
    fn legs(d: &SegmentData, l0: f64, l1: f64, w: f64) -> Self {
        Self { pts: [d.p0, d.p0 + d.t0 * l0, d.p3 - d.t1 * l1, d.p3], w }
    }

    fn weights(&self) -> [f64; 4] {
        [1.0, self.w, self.w, 1.0]
    }

    /// Point, first and second derivative on `[0, 1]`.
    fn derivs(&self, t: f64) -> [Vec2; 3] {
        let ws = self.weights();
        let h: Vec<[f64; 3]> = self.pts.iter().zip(ws).map(|(p, w)| [p.x * w, p.y * w, w]).collect();
        let s = 1.0 - t;
        let b3 = [s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t];
        let b2 = [s * s, 2.0 * s * t, t * t];
        let b1 = [s, t];
        let mut a = [[0.0; 3]; 3];
        for c in 0..3 {
            a[0][c] = (0..4).map(|i| b3[i] * h[i][c]).sum();
            a[1][c] = (0..3).map(|i| 3.0 * b2[i] * (h[i + 1][c] - h[i][c])).sum();
            a[2][c] = (0..2).map(|i| 6.0 * b1[i] * (h[i + 2][c] - 2.0 * h[i + 1][c] + h[i][c])).sum();
        }
        let v = |k: usize| Vec2::new(a[k][0], a[k][1]);
        let c0 = v(0) / a[0][2];
        let c1 = (v(1) - c0 * a[1][2]) / a[0][2];
        let c2 = (v(2) - c1 * (2.0 * a[1][2]) - c0 * a[2][2]) / a[0][2];
        [c0, c1, c2]
    }

    fn curvature(&self, t: f64) -> f64 {
        let [_, d1, d2] = self.derivs(t);
        let v = d1.norm();
        d1.cross(d2) / (v * v * v)
    }

    /// Curvature stays between its end values without overshoot.
    fn is_monotone(&self, k0: f64, k1: f64) -> bool {
        let tol = MONOTONE_TOL * k0.abs().max(k1.abs()).max(f64::MIN_POSITIVE);
        let sign = if k1 >= k0 { 1.0 } else { -1.0 };
        let mut prev = k0;
        for j in 1..=MONOTONE_SAMPLES {
            let k = self.curvature(j as f64 / MONOTONE_SAMPLES as f64);
            if !k.is_finite() || sign * (k - prev) < -tol {
                return false;
            }
            prev = k;
        }
        true
    }
}

fn segment_data(table: &HermiteTable, i: usize) -> Result<SegmentData> {
    let n = table.nodes.len();
    let a = &table.nodes[i];
    let b = &table.nodes[(i + 1) % n];
    let tan = |node: &crate::analytic::HermiteNode| {
        node.unit_tangent().ok_or_else(|| Error::HermiteSegment { segment: i, reason: "zero derivative".into() })
    };
    Ok(SegmentData {
        p0: a.point,
        p3: b.point,
        t0: tan(a)?,
        t1: tan(b)?,
        k0: a.signed_curvature(),
        k1: b.signed_curvature(),
        length: table.arc_lengths[i],
    })
}

/// Circular arc (or line) through the segment data, if the data is compatible with one.
fn exact_conic(d: &SegmentData) -> Option<RationalCubic> {
    let chord = d.p3 - d.p0;
    let len = chord.norm();
    let kscale = d.k0.abs().max(d.k1.abs());
    if (d.k0 - d.k1).abs() > CIRCLE_TOL * kscale.max(1.0 / len) {
        return None;
    }
    let k = 0.5 * (d.k0 + d.k1);
    let phi = d.t0.cross(d.t1).atan2(d.t0.dot(d.t1));
    if k.abs() * len <= CIRCLE_TOL {
        let dir = chord / len;
        if dir.distance(d.t0) <= CIRCLE_TOL && dir.distance(d.t1) <= CIRCLE_TOL {
            return Some(RationalCubic::legs(d, len / 3.0, len / 3.0, 1.0));
        }
        return None;
    }
    if phi.abs() >= std::f64::consts::PI - 1e-6 || phi * k <= 0.0 {
        return None;
    }
    let predicted = (d.t0 * phi.sin() + d.t0.perp() * (1.0 - phi.cos())) / k;
    if predicted.distance(chord) > CIRCLE_TOL * len {
        return None;
    }
    let w = (0.5 * phi).cos();
    let q1 = d.p0 + d.t0 * ((0.5 * phi).tan() / k);
    let p1 = (d.p0 + q1 * (2.0 * w)) / (1.0 + 2.0 * w);
    let p2 = (d.p3 + q1 * (2.0 * w)) / (1.0 + 2.0 * w);
    Some(RationalCubic { pts: [d.p0, p1, p2, d.p3], w: (1.0 + 2.0 * w) / 3.0 })
}

/// Positive leg pairs `(l0, l1)` meeting both end curvatures for inner weight `w`.
fn solve_legs(d: &SegmentData, w: f64) -> Vec<(f64, f64)> {
    let chord = d.p3 - d.p0;
    let len = chord.norm();
    let a = 1.5 * w;
    let c = d.t0.cross(d.t1);
    let e0 = d.t0.cross(chord);
    let e1 = chord.cross(d.t1);
    if d.k0 == 0.0 && d.k1 == 0.0 {
        if c.abs() <= CIRCLE_TOL {
            return Vec::new();
        }
        let (l0, l1) = (e1 / c, e0 / c);
        return if l0 > 0.0 && l1 > 0.0 { vec![(l0, l1)] } else { Vec::new() };
    }
    // parametrize by leg x; leg y follows from the other end's condition
    let swap = d.k1 == 0.0;
    let (ka, ea, kb, eb) = if swap { (d.k1, e1, d.k0, e0) } else { (d.k0, e0, d.k1, e1) };
    let other = |x: f64| {
        let q = (eb - c * x) / (a * kb);
        (q > 0.0).then(|| q.sqrt())
    };
    let residual = |x: f64| match other(x) {
        Some(y) => a * ka * x * x - ea + c * y,
        None => f64::NAN,
    };
    let xmax = 3.0 * len;
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for j in 1..=LEG_SAMPLES {
        let x = xmax * j as f64 / LEG_SAMPLES as f64;
        let r = residual(x);
        if !r.is_finite() {
            prev = None;
            continue;
        }
        if r == 0.0 {
            roots.push(x);
        } else if let Some((xp, rp)) = prev {
            if rp * r < 0.0 {
                if let Ok(root) = bracket_root(residual, xp, x, 1e-15 * len) {
                    roots.push(root);
                }
            }
        }
        prev = Some((x, r));
    }
    roots
        .into_iter()
        .filter_map(|x| {
            let y = other(x)?;
            (y > 1e-12 * len).then_some(if swap { (y, x) } else { (x, y) })
        })
        .collect()
}

/// Discrete `∫ (dκ/ds)² ds` over the segment.
fn fairness(rc: &RationalCubic) -> f64 {
    let mut prev: Option<(Vec2, f64)> = None;
    let mut total = 0.0;
    for j in 0..=MONOTONE_SAMPLES {
        let t = j as f64 / MONOTONE_SAMPLES as f64;
        let [p, d1, d2] = rc.derivs(t);
        let v = d1.norm();
        let k = d1.cross(d2) / (v * v * v);
        if let Some((pp, kp)) = prev {
            let ds = p.distance(pp);
            if ds > 0.0 {
                total += (k - kp) * (k - kp) / ds;
            }
        }
        prev = Some((p, k));
    }
    total
}

/// Candidate ranking: monotone curvature first, then fairness.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    cubic: RationalCubic,
    monotone: bool,
    fairness: f64,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        (self.monotone && !other.monotone) || (self.monotone == other.monotone && self.fairness < other.fairness)
    }
}

fn best_for_weight(d: &SegmentData, w: f64) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for (l0, l1) in solve_legs(d, w) {
        let cubic = RationalCubic::legs(d, l0, l1, w);
        let fair = fairness(&cubic);
        if !fair.is_finite() {
            continue;
        }
        let cand = Candidate { cubic, monotone: cubic.is_monotone(d.k0, d.k1), fairness: fair };
        if best.is_none_or(|b| cand.better_than(&b)) {
            best = Some(cand);
        }
    }
    best
}

fn fit_segment(d: &SegmentData, index: usize) -> Result<RationalCubic> {
    if let Some(rc) = exact_conic(d) {
        return Ok(rc);
    }
    let chord = (d.p3 - d.p0).norm();
    if !(chord > 0.0) {
        return Err(Error::HermiteSegment { segment: index, reason: "coincident end points".into() });
    }
    if d.t0.dot(d.t1) < -1.0 + CIRCLE_TOL && d.k0 == 0.0 && d.k1 == 0.0 {
        return Err(Error::HermiteSegment {
            segment: index,
            reason: "antiparallel tangents with zero curvature".into(),
        });
    }
    let log_w = |j: usize| W_MIN.ln() + (W_MAX / W_MIN).ln() * j as f64 / (WEIGHT_SAMPLES - 1) as f64;
    let grid: Vec<Option<Candidate>> = (0..WEIGHT_SAMPLES).map(|j| best_for_weight(d, log_w(j).exp())).collect();
    let Some((i, mut best)) = grid.iter().enumerate().filter_map(|(i, c)| c.map(|c| (i, c))).reduce(|a, b| {
        if b.1.better_than(&a.1) {
            b
        } else {
            a
        }
    }) else {
        return Err(Error::HermiteSegment {
            segment: index,
            reason: "no rational cubic matches the end curvatures".into(),
        });
    };
    // golden-section refinement of the weight around the best grid point
    let (mut a, mut b) = (log_w(i.saturating_sub(1)), log_w((i + 1).min(WEIGHT_SAMPLES - 1)));
    let score = |x: f64| best_for_weight(d, x.exp());
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut c1 = score(x1);
    let mut c2 = score(x2);
    for _ in 0..GOLDEN_ITERATIONS {
        let first_wins = match (c1, c2) {
            (Some(p), Some(q)) => !q.better_than(&p),
            (Some(_), None) => true,
            _ => false,
        };
        if first_wins {
            b = x2;
            x2 = x1;
            c2 = c1;
            x1 = b - g * (b - a);
            c1 = score(x1);
        } else {
            a = x1;
            x1 = x2;
            c1 = c2;
            x2 = a + g * (b - a);
            c2 = score(x2);
        }
    }
    for c in [c1, c2].into_iter().flatten() {
        if c.better_than(&best) {
            best = c;
        }
    }
    Ok(best.cubic)
}

/// Piecewise rational cubic (degree 3, full-multiplicity interior knots) through the table,
/// parametrized by the table's cumulative arc length.
pub fn nurbzs_from_hermite(table: &HermiteTable) -> Result<NurbsCurve> {
    table.validate()?;
    let segs = table.arc_lengths.len();
    let mut pts = Vec::with_capacity(3 * segs + 1);
    let mut weights = Vec::with_capacity(3 * segs + 1);
    let mut knots = vec![0.0; 4];
    let mut u = 0.0;
    for i in 0..segs {
        let d = segment_data(table, i)?;
        let rc = fit_segment(&d, i)?;
        let ws = rc.weights();
        if i == 0 {
            pts.push(rc.pts[0]);
            weights.push(1.0);
        }
        for j in 1..4 {
            pts.push(rc.pts[j]);
            weights.push(ws[j]);
        }
        u += d.length;
        let mult = if i + 1 == segs { 4 } else { 3 };
        knots.extend(std::iter::repeat_n(u, mult));
    }
    NurbsCurve::new(3, knots, pts, weights)
}

/// Degree-`m` polynomial B-spline through the node positions with tangents, curvatures and
/// fairness matched in the least-squares sense.
pub fn bspline_from_hermite(table: &HermiteTable, m: usize) -> Result<NurbsCurve> {
    if !matches!(m, 6 | 8 | 10) {
        return Err(Error::DegreeNotSupported(m));
    }
    table.validate()?;
    let n = table.nodes.len();
    if n < m / 2 + 2 {
        return Err(Error::InvalidInput(format!("degree {m} needs at least {} nodes, got {n}", m / 2 + 2)));
    }
    let mut node_params = Vec::with_capacity(n + 1);
    node_params.push(0.0);
    for l in &table.arc_lengths {
        node_params.push(node_params.last().unwrap() + l);
    }
    let total = *node_params.last().unwrap();
    let space = if table.closed {
        let mut breaks = Vec::with_capacity(2 * n + 1);
        for w in node_params.windows(2) {
            breaks.push(w[0]);
            breaks.push(0.5 * (w[0] + w[1]));
        }
        breaks.push(total);
        SplineSpace::periodic(m, &breaks)
    } else {
        SplineSpace::clamped(m, &node_params)
    };
    let h = total / table.arc_lengths.len() as f64;
    let mut prob = QuadraticProblem::new(space.unknowns());
    let kmax = table.nodes.iter().fold(0.0f64, |a, nd| a.max(nd.curvature));
    for (i, node) in table.nodes.iter().enumerate() {
        let u = node_params[i];
        let tan = node.unit_tangent().expect("validated");
        prob.constrain_value(&space, u, 0, Side::Right, node.point);
        prob.add_target(&space, u, 1, tan, 1.0);
        prob.add_target(&space, u, 2, tan.perp() * node.signed_curvature(), h * h);
    }
    prob.add_smoothing(&space, 3, 1e-4 * h * h * h);
    let x = prob.solve()?;
    let curve = space.curve_from_vector(&x)?;
    let mut residual = 0.0f64;
    for (i, node) in table.nodes.iter().enumerate() {
        let f = crate::curve::CurveGeometry::frame(&curve, node_params[i])?;
        let k = f.curvature().ok_or(Error::SingularCurve { t: node_params[i] })?;
        residual = residual.max((k - node.signed_curvature()).abs());
    }
    let allowed = CURVATURE_RESIDUAL_LIMIT * kmax + 1e-9 / total;
    if residual > allowed {
        return Err(Error::CurvatureResidual { residual, allowed });
    }
    Ok(curve)
}

/// Dispatches on degree: 3 gives a NURBzS, 6, 8 or 10 a polynomial B-spline.
pub fn approximate_hermite(table: &HermiteTable, degree: usize) -> Result<NurbsCurve> {
    match degree {
        3 => nurbzs_from_hermite(table),
        6 | 8 | 10 => bspline_from_hermite(table, degree),
        other => Err(Error::DegreeNotSupported(other)),
    }
}
