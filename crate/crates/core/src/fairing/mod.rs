//! Fair degree-6 interpolants (v-curves) of support and tangent polylines.
//!
//! The curve lives in a spline space with two spans per polyline gap and chord-length
//! breaks. Interpolation (support) or tangency (tangent) conditions are linear, so the
//! fairing functional is minimized by Levenberg-Marquardt over the null space of those
//! conditions.
//! Work is done in a canonical frame (first vertex at the origin, first edge along +x,
//! unit total chord length) so the result is equivariant under similarity transforms.

mod lm;
mod objective;

pub use objective::Functional;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::analytic::{sample_hermite, HermiteTable};
use crate::curve::CurveGeometry;
use crate::error::{Error, Result};
use crate::geom::{Similarity, Vec2};
use crate::numerics::{bracket_root, kronrod15_rule, ToleranceConfig};
use crate::nurbs::fit::{null_space, QuadraticProblem, SplineSpace};
use crate::nurbs::{NurbsCurve, Side, Topology};

pub const VCURVE_DEGREE: usize = 6;
const SPANS_PER_GAP: usize = 4;
/// Weight of the speed-variation penalty in the canonical frame. Without it the
/// reparametrization directions form flat valleys that stall the descent; at this
/// weight the functional ends within a few parts per million of the unpenalized optimum.
const PARAMETRIZATION_WEIGHT: f64 = 10.0;
/// Relative size below which vertices coincide or points count as collinear.
const DEGENERATE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolylineKind {
    Support,
    Tangent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub vertices: Vec<Vec2>,
    pub kind: PolylineKind,
    pub topology: Topology,
}

impl Polyline {
    pub fn support(vertices: Vec<Vec2>, topology: Topology) -> Self {
        Self { vertices, kind: PolylineKind::Support, topology }
    }

    pub fn tangent(vertices: Vec<Vec2>, topology: Topology) -> Self {
        Self { vertices, kind: PolylineKind::Tangent, topology }
    }

    pub fn is_closed(&self) -> bool {
        self.topology == Topology::Closed
    }

    /// Edge vectors; closed polylines include the edge from the last vertex back to the first.
    pub fn edges(&self) -> Vec<Vec2> {
        let v = &self.vertices;
        let mut e: Vec<Vec2> = v.windows(2).map(|w| w[1] - w[0]).collect();
        if self.is_closed() && !v.is_empty() {
            e.push(v[0] - v[v.len() - 1]);
        }
        e
    }

    pub fn validate(&self) -> Result<()> {
        let need = if self.is_closed() { 4 } else { 3 };
        let got = self.vertices.len();
        if got < need {
            return Err(Error::PolylineTooShort { got, need });
        }
        if let Some(i) = self.vertices.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("polyline vertex {i} is not finite")));
        }
        let size: f64 = self.edges().iter().map(|e| e.norm()).sum();
        for (i, e) in self.edges().iter().enumerate() {
            if !(e.norm() > DEGENERATE * size) {
                return Err(Error::DegenerateEdge { index: i, next: (i + 1) % got });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FairingConfig {
    pub max_iterations: usize,
    /// Gradient infinity norm at which the descent stops (canonical frame).
    pub gradient_tol: f64,
    pub functional: Functional,
}

impl Default for FairingConfig {
    fn default() -> Self {
        Self { max_iterations: 2000, gradient_tol: 1e-9, functional: Functional::Variation }
    }
}

impl FairingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be positive".into()));
        }
        if !(self.gradient_tol > 0.0 && self.gradient_tol.is_finite()) {
            return Err(Error::InvalidInput(format!("gradient_tol must be positive, got {}", self.gradient_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairedCurve {
    pub curve: NurbsCurve,
    /// Achieved value of the configured functional.
    pub functional: f64,
    pub iterations: usize,
    /// Parameters of the interpolated vertices (support) or contact points (tangent).
    pub nodes: Vec<f64>,
}

/// Where [`hermite_of`] samples a faired curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HermiteStations {
    VertexNodes,
    Uniform(usize),
}

/// Fairs either kind of polyline.
pub fn vcurve(poly: &Polyline, cfg: &FairingConfig) -> Result<FairedCurve> {
    match poly.kind {
        PolylineKind::Support => vcurve_from_support(poly, cfg),
        PolylineKind::Tangent => vcurve_from_tangent(poly, cfg),
    }
}

/// Degree-6 curve through every vertex minimizing the configured functional.
pub fn vcurve_from_support(poly: &Polyline, cfg: &FairingConfig) -> Result<FairedCurve> {
    if poly.kind != PolylineKind::Support {
        return Err(Error::InvalidInput("expected a support polyline".into()));
    }
    poly.validate()?;
    cfg.validate()?;
    let closed = poly.is_closed();
    let nodes = chord_params(&poly.vertices, closed);
    if straight(&poly.vertices, closed)? {
        return straight_line(&poly.vertices, &nodes);
    }
    let frame = Canonical::new(&poly.vertices, *nodes.last().unwrap());
    let pts: Vec<Vec2> = poly.vertices.iter().map(|&p| frame.to.apply(p)).collect();
    let params: Vec<f64> = nodes.iter().map(|&u| u * frame.to.scale).collect();
    let space = spline_space(&params, closed);
    let h = mean_span(&space);
    let estimates = circle_estimates(&pts, closed);

    let mut prob = QuadraticProblem::new(space.unknowns());
    for (i, &p) in pts.iter().enumerate() {
        let (t, k) = estimates[i];
        prob.constrain_value(&space, params[i], 0, Side::Right, p);
        prob.add_target(&space, params[i], 1, t, 1.0);
        prob.add_target(&space, params[i], 2, t.perp() * k, h * h);
    }
    prob.add_smoothing(&space, 3, 1e-4 * h.powi(3));
    let x0 = prob.solve()?;
    let (a, b) = prob.constraint_matrix();
    let result = optimize(&space, &a, &b, x0, cfg, |_| true)?;
    finish(&space, &result, &frame, &nodes[..pts.len()], cfg)
}

/// Degree-6 curve touching each edge once, tangent to it there, minimizing the
/// configured functional. Contact positions along the edges are free.
pub fn vcurve_from_tangent(poly: &Polyline, cfg: &FairingConfig) -> Result<FairedCurve> {
    if poly.kind != PolylineKind::Tangent {
        return Err(Error::InvalidInput("expected a tangent polyline".into()));
    }
    poly.validate()?;
    cfg.validate()?;
    let closed = poly.is_closed();
    let edges = poly.edges();
    check_turns(&edges, closed)?;
    let mids: Vec<Vec2> = poly.vertices.iter().zip(&edges).map(|(&v, &e)| v + e * 0.5).collect();
    let nodes = chord_params(&mids, closed);
    if !closed && edges.iter().all(|e| e.cross(edges[0]).abs() <= DEGENERATE * e.norm() * edges[0].norm()) {
        return straight_line(&mids, &nodes);
    }
    let frame = Canonical::new(&mids, *nodes.last().unwrap());
    let verts: Vec<Vec2> = poly.vertices.iter().map(|&p| frame.to.apply(p)).collect();
    let dirs: Vec<Vec2> = edges.iter().map(|&e| frame.to.apply_vector(e)).collect();
    let contacts: Vec<Vec2> = mids.iter().map(|&p| frame.to.apply(p)).collect();
    let params: Vec<f64> = nodes.iter().map(|&u| u * frame.to.scale).collect();
    let space = spline_space(&params, closed);
    let h = mean_span(&space);
    let k = contacts.len();

    let mut prob = QuadraticProblem::new(space.unknowns());
    for i in 0..k {
        let t = dirs[i].normalized().expect("validated edge");
        let kappa = contact_curvature(&contacts, &dirs, i, closed);
        prob.constrain_value(&space, params[i], 0, Side::Right, contacts[i]);
        prob.constrain_direction(&space, params[i], dirs[i]);
        prob.add_target(&space, params[i], 1, t, 1.0);
        prob.add_target(&space, params[i], 2, t.perp() * kappa, h * h);
    }
    prob.add_smoothing(&space, 3, 1e-4 * h.powi(3));
    let initial = prob.solve()?;

    // unknowns: control points, then one edge fraction per contact
    let n2 = space.unknowns();
    let nf = space.n_free;
    let mut a = DMatrix::zeros(3 * k, n2 + k);
    for i in 0..k {
        let row = space.basis(params[i], 1, Side::Right);
        for (j, &idx) in row.indices.iter().enumerate() {
            a[(3 * i, idx)] += row.values[0][j];
            a[(3 * i + 1, nf + idx)] += row.values[0][j];
            a[(3 * i + 2, idx)] -= dirs[i].y * row.values[1][j];
            a[(3 * i + 2, nf + idx)] += dirs[i].x * row.values[1][j];
        }
        a[(3 * i, n2 + i)] = -dirs[i].x;
        a[(3 * i + 1, n2 + i)] = -dirs[i].y;
    }
    let mut x0 = DVector::from_element(n2 + k, 0.5);
    x0.rows_mut(0, n2).copy_from(&initial);
    let feasible = |x: &DVector<f64>| {
        (0..k).all(|i| {
            let tau = x[n2 + i];
            tau > 0.0 && tau < 1.0 && space.eval(x, params[i], 1, Side::Right).dot(dirs[i]) > 0.0
        })
    };
    if !feasible(&x0) {
        return Err(Error::InvalidInput("initial tangent fit runs against an edge direction".into()));
    }
    let mut b = DVector::zeros(3 * k);
    for i in 0..k {
        b[3 * i] = verts[i].x;
        b[3 * i + 1] = verts[i].y;
    }
    let result = optimize(&space, &a, &b, x0, cfg, feasible)?;
    finish(&space, &result, &frame, &nodes[..k], cfg)
}

/// Hermite data of a faired curve at its nodes or at `n` stations uniform in arc length.
pub fn hermite_of(fc: &FairedCurve, at: HermiteStations) -> Result<HermiteTable> {
    let cfg = ToleranceConfig::default();
    let c = &fc.curve;
    let closed = c.is_periodic();
    let (lo, hi) = c.domain();
    let params = match at {
        HermiteStations::VertexNodes => fc.nodes.clone(),
        HermiteStations::Uniform(n) => arc_length_stations(c, n, closed)?,
    };
    let mut table = sample_hermite(c, &params, &cfg)?;
    if closed {
        let mut wrap = c.arc_length(*params.last().unwrap(), hi, &cfg)?;
        if params[0] > lo {
            wrap += c.arc_length(lo, params[0], &cfg)?;
        }
        table.arc_lengths.push(wrap);
        table.closed = true;
        table.validate()?;
    }
    Ok(table)
}

struct Canonical {
    to: Similarity,
    from: Similarity,
}

impl Canonical {
    fn new(points: &[Vec2], length: f64) -> Self {
        let first = points[1] - points[0];
        let angle = -first.y.atan2(first.x);
        let scale = 1.0 / length;
        let to = Similarity { angle, scale, offset: -(points[0].rotated(angle) * scale) };
        Self { to, from: to.inverse() }
    }
}

fn chord_params(points: &[Vec2], closed: bool) -> Vec<f64> {
    let mut u = vec![0.0];
    for w in points.windows(2) {
        u.push(u.last().unwrap() + w[0].distance(w[1]));
    }
    if closed {
        u.push(u.last().unwrap() + points[points.len() - 1].distance(points[0]));
    }
    u
}

fn spline_space(nodes: &[f64], closed: bool) -> SplineSpace {
    let mut breaks = Vec::with_capacity(SPANS_PER_GAP * nodes.len());
    for w in nodes.windows(2) {
        for j in 0..SPANS_PER_GAP {
            breaks.push(w[0] + (w[1] - w[0]) * j as f64 / SPANS_PER_GAP as f64);
        }
    }
    breaks.push(*nodes.last().unwrap());
    if closed {
        SplineSpace::periodic(VCURVE_DEGREE, &breaks)
    } else {
        SplineSpace::clamped(VCURVE_DEGREE, &breaks)
    }
}

fn mean_span(space: &SplineSpace) -> f64 {
    let b = &space.breaks;
    (b[b.len() - 1] - b[0]) / (b.len() - 1) as f64
}

/// True for open polylines whose vertices advance along one line. Collinear inputs that
/// fold back, or closed ones, have no fair interpolant.
fn straight(points: &[Vec2], closed: bool) -> Result<bool> {
    let first = points[0];
    let size: f64 = points.windows(2).map(|w| w[0].distance(w[1])).sum();
    let dir =
        points.iter().map(|&p| p - first).max_by(|a, b| a.norm_sq().total_cmp(&b.norm_sq())).and_then(Vec2::normalized);
    let Some(dir) = dir else { return Ok(false) };
    if points.iter().any(|&p| (p - first).cross(dir).abs() > DEGENERATE * size) {
        return Ok(false);
    }
    if closed {
        return Err(Error::InvalidInput("closed polyline is collinear".into()));
    }
    let along: Vec<f64> = points.iter().map(|&p| (p - first).dot(dir)).collect();
    if along.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("collinear polyline folds back on itself".into()));
    }
    Ok(true)
}

/// Exact degree-6 line through collinear points at their chord-length parameters.
fn straight_line(points: &[Vec2], nodes: &[f64]) -> Result<FairedCurve> {
    let space = spline_space(nodes, false);
    let first = points[0];
    let dir = (points[points.len() - 1] - first).normalized().expect("distinct ends");
    let p = VCURVE_DEGREE;
    let cps: Vec<Vec2> = (0..space.n_free)
        .map(|j| {
            let greville = space.knots[j + 1..=j + p].iter().sum::<f64>() / p as f64;
            first + dir * greville
        })
        .collect();
    Ok(FairedCurve { curve: space.curve(&cps)?, functional: 0.0, iterations: 0, nodes: nodes.to_vec() })
}

/// Unit tangent and signed curvature of the circle through each vertex and its neighbours.
fn circle_estimates(pts: &[Vec2], closed: bool) -> Vec<(Vec2, f64)> {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (a, b, c) = if closed {
                (pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n])
            } else if i == 0 {
                (pts[0], pts[1], pts[2])
            } else if i == n - 1 {
                (pts[n - 3], pts[n - 2], pts[n - 1])
            } else {
                (pts[i - 1], pts[i], pts[i + 1])
            };
            circle_frame(a, b, c, pts[i])
        })
        .collect()
}

fn circle_frame(a: Vec2, b: Vec2, c: Vec2, at: Vec2) -> (Vec2, f64) {
    let (ab, ac) = (b - a, c - a);
    let d = 2.0 * ab.cross(ac);
    let scale = ab.norm() * ac.norm();
    if d.abs() <= DEGENERATE * scale {
        return (ac.normalized().unwrap_or(Vec2::new(1.0, 0.0)), 0.0);
    }
    let center =
        a + Vec2::new(ac.y * ab.norm_sq() - ab.y * ac.norm_sq(), ab.x * ac.norm_sq() - ac.x * ab.norm_sq()) / d;
    let kappa = 2.0 * ab.cross(c - b) / (ab.norm() * (c - b).norm() * ac.norm());
    let t = (at - center).perp().normalized().unwrap_or(Vec2::new(1.0, 0.0)) * kappa.signum();
    (t, kappa)
}

/// Turning rate between a contact and its neighbours: turn angle over contact distance.
fn contact_curvature(contacts: &[Vec2], dirs: &[Vec2], i: usize, closed: bool) -> f64 {
    let k = contacts.len();
    let rate = |a: usize, b: usize| {
        let turn = dirs[a].cross(dirs[b]).atan2(dirs[a].dot(dirs[b]));
        turn / contacts[a].distance(contacts[b])
    };
    let mut rates = Vec::with_capacity(2);
    if closed || i > 0 {
        rates.push(rate((i + k - 1) % k, i));
    }
    if closed || i + 1 < k {
        rates.push(rate(i, (i + 1) % k));
    }
    rates.iter().sum::<f64>() / rates.len() as f64
}

/// Rejects folded-back edge pairs, and non-convex or multiply winding closed polygons.
fn check_turns(edges: &[Vec2], closed: bool) -> Result<()> {
    let m = edges.len();
    let pairs = if closed { m } else { m - 1 };
    let mut turning = 0.0;
    let mut sign = 0.0;
    for i in 0..pairs {
        let (e0, e1) = (edges[i], edges[(i + 1) % m]);
        let cross = e0.cross(e1);
        let flat = cross.abs() <= DEGENERATE * e0.norm() * e1.norm();
        if flat && e0.dot(e1) < 0.0 {
            return Err(Error::InvalidInput(format!("tangent edges {i} and {} fold back", (i + 1) % m)));
        }
        turning += cross.atan2(e0.dot(e1));
        if closed {
            if flat || (sign != 0.0 && cross.signum() != sign) {
                return Err(Error::TangentNotConvex);
            }
            sign = cross.signum();
        }
    }
    if closed && (turning.abs() - std::f64::consts::TAU).abs() > 1e-6 {
        return Err(Error::TangentNotConvex);
    }
    Ok(())
}

struct Faired {
    x: DVector<f64>,
    functional: f64,
    iterations: usize,
    converged: bool,
}

fn optimize(
    space: &SplineSpace,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    x0: DVector<f64>,
    cfg: &FairingConfig,
    feasible: impl Fn(&DVector<f64>) -> bool,
) -> Result<Faired> {
    let obj = objective::Objective::new(space, cfg.functional, PARAMETRIZATION_WEIGHT);
    let singular = || Error::InvalidInput("initial interpolant has a stationary point".into());
    let pinv = a.clone().pseudo_inverse(1e-12 * a.amax()).map_err(|e| Error::SingularSystem(e.to_string()))?;
    let x0 = &x0 - &pinv * (a * &x0 - b);
    let f0 = obj.functional(&x0).ok_or_else(singular)?;
    let z = null_space(a);
    let m = lm::minimize(
        |y| {
            let x = &x0 + &z * y;
            if !feasible(&x) {
                return None;
            }
            obj.residuals(&x, &z)
        },
        DVector::zeros(z.ncols()),
        cfg.max_iterations,
        cfg.gradient_tol,
    )
    .ok_or_else(singular)?;
    // remove the round-off drift of the step out of the constraint null space
    let mut step = &z * &m.y;
    step -= &pinv * (a * &step);
    let x = &x0 + step;
    let f = obj.functional(&x).unwrap_or(f64::INFINITY);
    Ok(if f <= f0 {
        Faired { x, functional: f, iterations: m.iterations, converged: m.converged }
    } else {
        Faired { x: x0, functional: f0, iterations: m.iterations, converged: m.converged }
    })
}

fn finish(
    space: &SplineSpace,
    r: &Faired,
    frame: &Canonical,
    nodes: &[f64],
    cfg: &FairingConfig,
) -> Result<FairedCurve> {
    let n = space.n_free;
    let cps: Vec<Vec2> = (0..n).map(|i| frame.from.apply(Vec2::new(r.x[i], r.x[n + i]))).collect();
    let length = 1.0 / frame.to.scale;
    let breaks: Vec<f64> = space.breaks.iter().map(|&b| b * length).collect();
    let original = if space.periodic {
        SplineSpace::periodic(space.degree, &breaks)
    } else {
        SplineSpace::clamped(space.degree, &breaks)
    };
    let functional = match cfg.functional {
        Functional::Variation => r.functional / length.powi(3),
        Functional::Energy => r.functional / length,
    };
    let fc = FairedCurve { curve: original.curve(&cps)?, functional, iterations: r.iterations, nodes: nodes.to_vec() };
    if r.converged {
        Ok(fc)
    } else {
        Err(Error::FairingNonConvergence { iterations: r.iterations, functional, best: Box::new(fc) })
    }
}

/// `n` parameters splitting the curve into equal arc lengths (the end is omitted when closed).
fn arc_length_stations(c: &NurbsCurve, n: usize, closed: bool) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 stations, got {n}")));
    }
    let speed_integral = |a: f64, b: f64| -> f64 {
        kronrod15_rule(a, b).iter().map(|&(t, w)| w * c.frame(t).map(|f| f.speed()).unwrap_or(f64::NAN)).sum()
    };
    let breaks = c.segment_breaks();
    let mut cumulative = vec![0.0];
    for w in breaks.windows(2) {
        cumulative.push(cumulative.last().unwrap() + speed_integral(w[0], w[1]));
    }
    let total = *cumulative.last().unwrap();
    let gaps = if closed { n } else { n - 1 };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let s = total * i as f64 / gaps as f64;
        if i == 0 {
            out.push(breaks[0]);
            continue;
        }
        if !closed && i == n - 1 {
            out.push(*breaks.last().unwrap());
            continue;
        }
        let k = cumulative.partition_point(|&x| x <= s).clamp(1, breaks.len() - 1) - 1;
        let (a, b) = (breaks[k], breaks[k + 1]);
        let t = bracket_root(|t| speed_integral(a, t) - (s - cumulative[k]), a, b, 1e-13 * (b - a))?;
        out.push(t);
    }
    Ok(out)
}
