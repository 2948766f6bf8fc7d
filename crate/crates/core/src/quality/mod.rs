//! Fairness metrics: smoothness order, curvature extrema, curvature variation,
//! bending energy, deviation from a reference and log-curvature linearity.

use serde::{Deserialize, Serialize};

use crate::curve::{uniform_parameters, CurveGeometry, Frame};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::numerics::{bracket_root, integrate, ToleranceConfig};
use crate::nurbs::{NurbsCurve, Side};

/// Samples used to scan for curvature extrema and the largest curvature rate.
pub const SCAN_SAMPLES: usize = 2048;
/// Extrema whose curvature differs from a neighbor by less than this fraction of max |κ| are noise.
pub const NOISE_FLOOR: f64 = 1e-6;
const MAX_ORDER: usize = 5;
const CONTINUITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureExtremum {
    pub t: f64,
    pub s: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub smoothness_order: usize,
    pub extrema: Vec<CurvatureExtremum>,
    pub variation: f64,
    pub max_rate: f64,
    pub bending_energy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation_min: Option<f64>,
    pub monotone: bool,
    /// Absent when the curvature vanishes or changes sign.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lcg_residual: Option<f64>,
}

/// Full report; `reference` adds the deviation extremes.
pub fn quality_report(curve: &NurbsCurve, reference: Option<&dyn CurveGeometry>) -> Result<QualityReport> {
    let extrema = curvature_extrema(curve)?;
    let (variation, max_rate) = curvature_variation(curve)?;
    let bending_energy = bending_energy(curve)?;
    let (deviation_max, deviation_min) = match reference {
        Some(r) => {
            let (hi, lo) = deviation(curve, r, 1000)?;
            (Some(hi), Some(lo))
        }
        None => (None, None),
    };
    let lcg_residual = match lcg_linearity(curve, 64) {
        Ok(r) => Some(r),
        Err(Error::Domain(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(QualityReport {
        smoothness_order: smoothness_order(curve),
        monotone: extrema.is_empty(),
        extrema,
        variation,
        max_rate,
        bending_energy,
        deviation_max,
        deviation_min,
        lcg_residual,
    })
}

/// Smallest parametric continuity order over interior knots (and the seam of periodic curves), capped at 5.
pub fn smoothness_order(curve: &NurbsCurve) -> usize {
    let (lo, hi) = curve.domain();
    let breaks = curve.segment_breaks();
    let mut joints: Vec<(f64, f64)> = breaks[1..breaks.len() - 1].iter().map(|&u| (u, u)).collect();
    if curve.is_periodic() {
        joints.push((hi, lo));
    }
    let sided = |u: f64, side: Side| curve.derivatives_sided(u, MAX_ORDER, side).unwrap_or_default();
    let derivs: Vec<(Vec<Vec2>, Vec<Vec2>)> =
        joints.iter().map(|&(l, r)| (sided(l, Side::Left), sided(r, Side::Right))).collect();
    let mut typical = [0.0f64; MAX_ORDER + 1];
    for (l, r) in &derivs {
        for k in 0..l.len().min(r.len()) {
            typical[k] = typical[k].max(l[k].norm()).max(r[k].norm());
        }
    }
    let mut order = MAX_ORDER;
    for (l, r) in &derivs {
        let mut k = 0;
        while k < order && k + 1 < l.len() {
            let j = k + 1;
            let scale = l[j].norm().max(r[j].norm());
            if l[j].distance(r[j]) > CONTINUITY_TOL * scale + 1e-9 * typical[j] {
                break;
            }
            k = j;
        }
        order = order.min(k);
    }
    order
}

struct Scan {
    params: Vec<f64>,
    kappa: Vec<f64>,
    rate: Vec<f64>,
}

fn scan<C: CurveGeometry + ?Sized>(curve: &C) -> Result<Scan> {
    let params = uniform_parameters(curve.domain(), SCAN_SAMPLES + 1);
    let mut kappa = Vec::with_capacity(params.len());
    let mut rate = Vec::with_capacity(params.len());
    for &t in &params {
        let f = curve.frame(t)?;
        let (Some(k), Some(r)) = (f.curvature(), f.curvature_rate()) else {
            return Err(Error::SingularCurve { t });
        };
        kappa.push(k);
        rate.push(r);
    }
    Ok(Scan { params, kappa, rate })
}

fn rate_at<C: CurveGeometry + ?Sized>(curve: &C, t: f64) -> f64 {
    curve.frame(t).ok().and_then(|f| f.curvature_rate()).unwrap_or(f64::NAN)
}

/// Interior curvature extrema with noise-level ripples removed. Closed curves are scanned cyclically.
pub fn curvature_extrema<C: CurveGeometry + ?Sized>(curve: &C) -> Result<Vec<CurvatureExtremum>> {
    let sc = scan(curve)?;
    let kmax = sc.kappa.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    let kmin_s = sc.kappa.iter().copied().fold(f64::INFINITY, f64::min);
    let kmax_s = sc.kappa.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = NOISE_FLOOR * kmax;
    if kmax_s - kmin_s <= floor {
        return Ok(Vec::new());
    }
    let closed = curve.is_closed();
    let (lo, hi) = curve.domain();
    let tol = 1e-13 * (hi - lo);
    let mut roots = Vec::new();
    let mut last: Option<usize> = None;
    // a closed curve's final sample repeats the first
    let count = if closed { sc.params.len() - 1 } else { sc.params.len() };
    for i in 0..count {
        let r = sc.rate[i];
        if r == 0.0 {
            continue;
        }
        if let Some(j) = last {
            if sc.rate[j].signum() != r.signum() {
                if let Ok(t) = bracket_root(|t| rate_at(curve, t), sc.params[j], sc.params[i], tol) {
                    roots.push(t);
                }
            }
        }
        last = Some(i);
    }
    if closed {
        let first = sc.rate[..count].iter().position(|&r| r != 0.0);
        if let (Some(j), Some(i)) = (last, first) {
            if sc.rate[j].signum() != sc.rate[i].signum() {
                let t = bracket_root(|t| rate_at(curve, t), sc.params[j], hi, tol)
                    .or_else(|_| bracket_root(|t| rate_at(curve, t), lo, sc.params[i], tol))
                    .unwrap_or(lo);
                roots.push(if t == hi { lo } else { t });
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (hi - lo));
    if closed && roots.len() > 1 && (hi - roots[roots.len() - 1]) + (roots[0] - lo) <= 1e-9 * (hi - lo) {
        roots.pop();
    }
    let mut ext: Vec<(f64, f64)> = Vec::with_capacity(roots.len());
    for t in roots {
        let k = curve.frame(t)?.curvature().ok_or(Error::SingularCurve { t })?;
        ext.push((t, k));
    }
    let ends = if closed { None } else { Some((sc.kappa[0], sc.kappa[sc.kappa.len() - 1])) };
    let kept = suppress_noise(ext, ends, floor, closed);
    let cfg = ToleranceConfig::default();
    kept.into_iter().map(|(t, kappa)| Ok(CurvatureExtremum { t, s: curve.arc_length(lo, t, &cfg)?, kappa })).collect()
}

/// Removes adjacent extremum pairs (and extrema next to an open end) differing by less than `floor`.
fn suppress_noise(mut ext: Vec<(f64, f64)>, ends: Option<(f64, f64)>, floor: f64, cyclic: bool) -> Vec<(f64, f64)> {
    loop {
        let n = ext.len();
        if n == 0 {
            return ext;
        }
        let mut best: Option<(f64, usize, bool)> = None;
        let pairs = if cyclic {
            if n > 1 {
                n
            } else {
                0
            }
        } else {
            n - 1
        };
        for i in 0..pairs {
            let d = (ext[i].1 - ext[(i + 1) % n].1).abs();
            if d < floor && best.is_none_or(|b| d < b.0) {
                best = Some((d, i, true));
            }
        }
        if let Some((k0, k1)) = ends {
            for (i, k) in [(0, k0), (n - 1, k1)] {
                let d = (ext[i].1 - k).abs();
                if d < floor && best.is_none_or(|b| d < b.0) {
                    best = Some((d, i, false));
                }
            }
        }
        match best {
            None => return ext,
            Some((_, i, true)) => {
                let j = (i + 1) % n;
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                ext.remove(b);
                ext.remove(a);
            }
            Some((_, i, false)) => {
                ext.remove(i);
            }
        }
    }
}

fn integrate_pieces<C, F>(curve: &C, cuts: &[f64], mut f: F) -> Result<f64>
where
    C: CurveGeometry + ?Sized,
    F: FnMut(&Frame) -> f64,
{
    let (lo, hi) = curve.domain();
    let mut pts: Vec<f64> = curve.breakpoints();
    pts.extend(cuts.iter().copied().filter(|&t| t > lo && t < hi));
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let cfg = ToleranceConfig::default();
    let mut total = 0.0;
    for w in pts.windows(2) {
        let mut err = None;
        let r = integrate(
            |t| match curve.frame(t) {
                Ok(fr) => f(&fr),
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            w[0],
            w[1],
            &cfg,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        total += r.value;
    }
    Ok(total)
}

/// Total variation of curvature over arc length, and the largest sampled |dκ/ds|.
pub fn curvature_variation<C: CurveGeometry + ?Sized>(curve: &C) -> Result<(f64, f64)> {
    let sc = scan(curve)?;
    let max_rate = sc.rate.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let kmax = sc.kappa.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    let mut cuts: Vec<f64> = Vec::new();
    for i in 1..sc.params.len() {
        if sc.rate[i - 1].signum() != sc.rate[i].signum() {
            let a = sc.params[i - 1];
            let b = sc.params[i];
            cuts.push(bracket_root(|t| rate_at(curve, t), a, b, 1e-13 * (b - a).max(1e-300)).unwrap_or(0.5 * (a + b)));
        }
    }
    if sc.kappa.iter().all(|&k| (k - sc.kappa[0]).abs() <= 1e-12 * kmax) {
        return Ok((0.0, max_rate));
    }
    let mut variation = integrate_pieces(curve, &cuts, |f| f.curvature_rate().unwrap_or(0.0).abs() * f.speed())?;
    // curvature jumps at joints with less than C2 continuity
    let (lo, hi) = curve.domain();
    for &u in curve.breakpoints().iter().filter(|&&u| u > lo && u < hi) {
        let left = curve.frame(u - 1e-12 * (hi - lo)).ok().and_then(|f| f.curvature());
        let right = curve.frame(u).ok().and_then(|f| f.curvature());
        if let (Some(l), Some(r)) = (left, right) {
            if (l - r).abs() > NOISE_FLOOR * kmax {
                variation += (l - r).abs();
            }
        }
    }
    Ok((variation, max_rate))
}

/// ∫ κ² ds over the whole curve.
pub fn bending_energy<C: CurveGeometry + ?Sized>(curve: &C) -> Result<f64> {
    integrate_pieces(curve, &[], |f| {
        let v = f.speed();
        if v > 0.0 {
            let k = f.d1.cross(f.d2) / (v * v * v);
            k * k * v
        } else {
            0.0
        }
    })
}

/// Closest-point table over a reference curve.
struct ProjectionTable<'a, C: ?Sized> {
    curve: &'a C,
    params: Vec<f64>,
    points: Vec<Vec2>,
    closed: bool,
}

impl<'a, C: CurveGeometry + ?Sized> ProjectionTable<'a, C> {
    fn new(curve: &'a C, n: usize) -> Result<Self> {
        let params = uniform_parameters(curve.domain(), n);
        let points = params.iter().map(|&t| curve.point(t)).collect::<Result<Vec<_>>>()?;
        Ok(Self { curve, params, points, closed: curve.is_closed() })
    }

    fn foot_gradient(&self, p: Vec2, t: f64) -> f64 {
        match self.curve.frame(t) {
            Ok(f) => (f.point - p).dot(f.d1),
            Err(_) => f64::NAN,
        }
    }

    /// Parameter of the closest point to `p`.
    fn project(&self, p: Vec2) -> Option<f64> {
        let (j, _) =
            self.points.iter().enumerate().map(|(i, q)| (i, q.distance(p))).min_by(|a, b| a.1.total_cmp(&b.1))?;
        let last = self.params.len() - 1;
        let (lo, hi) = (self.params[0], self.params[last]);
        let tol = 1e-14 * (hi - lo);
        let mut brackets = Vec::new();
        if j > 0 {
            brackets.push((self.params[j - 1], self.params[j]));
        } else if self.closed {
            brackets.push((self.params[last - 1], hi));
        }
        if j < last {
            brackets.push((self.params[j], self.params[j + 1]));
        } else if self.closed {
            brackets.push((lo, self.params[1]));
        }
        for &(a, b) in &brackets {
            let (ga, gb) = (self.foot_gradient(p, a), self.foot_gradient(p, b));
            if ga <= 0.0 && gb >= 0.0 {
                if let Ok(t) = bracket_root(|t| self.foot_gradient(p, t), a, b, tol) {
                    return Some(t);
                }
            }
        }
        // minimum at an open end
        if !self.closed {
            if j == 0 && self.foot_gradient(p, lo) >= 0.0 {
                return Some(lo);
            }
            if j == last && self.foot_gradient(p, hi) <= 0.0 {
                return Some(hi);
            }
        }
        None
    }
}

/// Signed distance of `n` subject samples to the reference along the reference's right-hand
/// (outer, for counter-clockwise curves) normal at the closest point. Returns `(max, min)`.
pub fn deviation<S, R>(subject: &S, reference: &R, n: usize) -> Result<(f64, f64)>
where
    S: CurveGeometry + ?Sized,
    R: CurveGeometry + ?Sized,
{
    if n < 2 {
        return Err(Error::InvalidInput(format!("deviation needs at least 2 samples, got {n}")));
    }
    let table = ProjectionTable::new(reference, (4 * n).clamp(256, 4096))?;
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for (i, t) in uniform_parameters(subject.domain(), n).into_iter().enumerate() {
        let p = subject.point(t)?;
        let u = table.project(p).ok_or(Error::ProjectionFailed { sample: i })?;
        let f = reference.frame(u)?;
        let tan = f.unit_tangent().ok_or(Error::SingularCurve { t: u })?;
        let outward = -tan.perp();
        let d = (p - f.point).dot(outward);
        max = max.max(d);
        min = min.min(d);
    }
    Ok((max, min))
}

/// Maximum residual of a least-squares line through `(log s, log |κ|)` at `s_i = i L / n`, `i = 1..n`.
pub fn lcg_linearity<C: CurveGeometry + ?Sized>(curve: &C, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("log-curvature fit needs at least 3 samples, got {n}")));
    }
    let cfg = ToleranceConfig::default();
    let (lo, hi) = curve.domain();
    let grid = uniform_parameters((lo, hi), 257);
    let mut cum = vec![0.0];
    for w in grid.windows(2) {
        cum.push(cum.last().unwrap() + curve.arc_length(w[0], w[1], &cfg)?);
    }
    let total = *cum.last().unwrap();
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let mut sign = 0.0;
    for i in 1..=n {
        let s = total * i as f64 / n as f64;
        let j = cum.partition_point(|&c| c < s).clamp(1, grid.len() - 1);
        let (a, b) = (grid[j - 1], grid[j]);
        let t = if i == n {
            hi
        } else {
            let mut err = None;
            let t = bracket_root(
                |t| match curve.arc_length(a, t, &cfg) {
                    Ok(l) => cum[j - 1] + l - s,
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                },
                a,
                b,
                1e-14 * (hi - lo),
            )?;
            if let Some(e) = err {
                return Err(e);
            }
            t
        };
        let k = curve.frame(t)?.curvature().ok_or(Error::SingularCurve { t })?;
        if k == 0.0 || (sign != 0.0 && k.signum() != sign) {
            return Err(Error::Domain("curvature must keep one sign and not vanish for a log-curvature fit".into()));
        }
        sign = k.signum();
        xs.push(s.ln());
        ys.push(k.abs().ln());
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).abs()).fold(0.0, f64::max))
}
