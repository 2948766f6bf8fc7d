//! Curves given by curvature as a function of arc length, and log-aesthetic curves.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curve::{CurveGeometry, Frame};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::numerics::{integrate, integrate_vec, ToleranceConfig};

/// Log-aesthetic curve law: `kappa(s) = (c0 + c1 s)^(-1/alpha)`, or `c0 exp(-c1 s)` when alpha = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LacParams {
    pub alpha: f64,
    pub c0: f64,
    pub c1: f64,
}

impl LacParams {
    pub fn new(alpha: f64, c0: f64, c1: f64) -> Self {
        Self { alpha, c0, c1 }
    }
}

pub fn lac_curvature(p: &LacParams, s: f64) -> Result<f64> {
    if p.alpha == 0.0 {
        return Ok(p.c0 * (-p.c1 * s).exp());
    }
    let base = p.c0 + p.c1 * s;
    // a zero base is allowed when the exponent is positive (curvature vanishes there)
    if !(base > 0.0 || (base == 0.0 && p.alpha < 0.0)) {
        return Err(Error::Domain(format!("log-aesthetic base c0 + c1*s = {base} must be positive at s = {s}")));
    }
    Ok(base.powf(-1.0 / p.alpha))
}

fn lac_curvature_rate(p: &LacParams, s: f64) -> Result<f64> {
    if p.alpha == 0.0 {
        return Ok(-p.c1 * p.c0 * (-p.c1 * s).exp());
    }
    let base = p.c0 + p.c1 * s;
    let e = -1.0 / p.alpha;
    if !(base > 0.0 || (base == 0.0 && e >= 1.0)) {
        return Err(Error::Domain(format!("log-aesthetic base {base} must be positive at s = {s}")));
    }
    Ok(e * p.c1 * base.powf(e - 1.0))
}

pub type CurvatureFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const BREAK_INTERVALS: usize = 64;

/// Curve reconstructed from an intrinsic equation `kappa(s)`, parametrized by arc length.
///
/// `theta(s) = theta0 + integral kappa` and `r(s) = origin + integral (cos theta, sin theta)`,
/// both measured from the start of `s_range`.
#[derive(Clone)]
pub struct IntrinsicCurve {
    kappa: CurvatureFn,
    dkappa: Option<CurvatureFn>,
    s_range: (f64, f64),
    cfg: ToleranceConfig,
    /// (s, theta, point) at breakpoints
    breaks: Vec<(f64, f64, Vec2)>,
}

impl fmt::Debug for IntrinsicCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntrinsicCurve").field("s_range", &self.s_range).finish_non_exhaustive()
    }
}

fn theta_increment(kappa: &CurvatureFn, a: f64, b: f64, cfg: &ToleranceConfig) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    Ok(integrate(|u| kappa(u), a, b, cfg)?.value)
}

fn position_increment(kappa: &CurvatureFn, s0: f64, theta0: f64, s1: f64, cfg: &ToleranceConfig) -> Result<Vec2> {
    if s0 == s1 {
        return Ok(Vec2::ZERO);
    }
    let mut failure = None;
    let r = integrate_vec(
        |u| match theta_increment(kappa, s0, u, cfg) {
            Ok(dt) => {
                let (s, c) = (theta0 + dt).sin_cos();
                [c, s]
            }
            Err(e) => {
                failure.get_or_insert(e);
                [0.0, 0.0]
            }
        },
        s0,
        s1,
        cfg,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(Vec2::new(r.value[0], r.value[1])),
    }
}

/// Builds the curve for `kappa` over `s_range`, starting at `origin` with tangent angle `theta0`.
pub fn integrate_intrinsic(
    kappa: CurvatureFn,
    s_range: (f64, f64),
    theta0: f64,
    origin: Vec2,
    cfg: &ToleranceConfig,
) -> Result<IntrinsicCurve> {
    IntrinsicCurve::build(kappa, None, s_range, theta0, origin, cfg)
}

impl IntrinsicCurve {
    fn build(
        kappa: CurvatureFn,
        dkappa: Option<CurvatureFn>,
        s_range: (f64, f64),
        theta0: f64,
        origin: Vec2,
        cfg: &ToleranceConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let (s0, s1) = s_range;
        if !(s0.is_finite() && s1.is_finite() && s1 > s0) {
            return Err(Error::InvalidInput(format!("invalid arc-length range [{s0}, {s1}]")));
        }
        for i in 0..=16 {
            let s = s0 + (s1 - s0) * i as f64 / 16.0;
            if !kappa(s).is_finite() {
                return Err(Error::Domain(format!("curvature is not finite at s = {s}")));
            }
        }
        let mut breaks = Vec::with_capacity(BREAK_INTERVALS + 1);
        breaks.push((s0, theta0, origin));
        for i in 1..=BREAK_INTERVALS {
            let (a, th, p) = breaks[i - 1];
            let b = if i == BREAK_INTERVALS { s1 } else { s0 + (s1 - s0) * i as f64 / BREAK_INTERVALS as f64 };
            let dp = position_increment(&kappa, a, th, b, cfg)?;
            let dth = theta_increment(&kappa, a, b, cfg)?;
            breaks.push((b, th + dth, p + dp));
        }
        Ok(Self { kappa, dkappa, s_range, cfg: *cfg, breaks })
    }

    /// Log-aesthetic curve over `s_range` (absolute arc-length values of the law).
    pub fn lac(
        params: LacParams,
        s_range: (f64, f64),
        theta0: f64,
        origin: Vec2,
        cfg: &ToleranceConfig,
    ) -> Result<Self> {
        // validate the whole range up front so the closure never sees a bad base
        for i in 0..=32 {
            let s = s_range.0 + (s_range.1 - s_range.0) * i as f64 / 32.0;
            lac_curvature(&params, s)?;
        }
        let kappa: CurvatureFn = Arc::new(move |s| lac_curvature(&params, s).unwrap_or(f64::NAN));
        let dkappa: CurvatureFn = Arc::new(move |s| lac_curvature_rate(&params, s).unwrap_or(f64::NAN));
        Self::build(kappa, Some(dkappa), s_range, theta0, origin, cfg)
    }

    fn segment(&self, s: f64) -> Result<(f64, f64, Vec2)> {
        let (lo, hi) = self.s_range;
        if !(s >= lo && s <= hi) {
            return Err(Error::ParameterOutOfRange { t: s, lo, hi });
        }
        let h = (hi - lo) / BREAK_INTERVALS as f64;
        let k = (((s - lo) / h).floor() as usize).min(BREAK_INTERVALS - 1);
        Ok(self.breaks[k])
    }

    pub fn theta(&self, s: f64) -> Result<f64> {
        let (b, th, _) = self.segment(s)?;
        Ok(th + theta_increment(&self.kappa, b, s, &self.cfg)?)
    }

    pub fn curvature(&self, s: f64) -> f64 {
        (self.kappa)(s)
    }

    fn curvature_rate(&self, s: f64) -> f64 {
        if let Some(dk) = &self.dkappa {
            return dk(s);
        }
        let (lo, hi) = self.s_range;
        let h = 1e-5 * (hi - lo);
        let a = (s - h).max(lo);
        let b = (s + h).min(hi);
        ((self.kappa)(b) - (self.kappa)(a)) / (b - a)
    }
}

impl CurveGeometry for IntrinsicCurve {
    fn domain(&self) -> (f64, f64) {
        self.s_range
    }

    fn frame(&self, s: f64) -> Result<Frame> {
        let (b, th, p) = self.segment(s)?;
        let theta = th + theta_increment(&self.kappa, b, s, &self.cfg)?;
        let point = p + position_increment(&self.kappa, b, th, s, &self.cfg)?;
        let e = Vec2::from_angle(theta);
        let n = e.perp();
        let k = self.curvature(s);
        let dk = self.curvature_rate(s);
        Ok(Frame { point, d1: e, d2: n * k, d3: n * dk - e * (k * k) })
    }

    fn arc_length(&self, t0: f64, t1: f64, _cfg: &ToleranceConfig) -> Result<f64> {
        let (lo, hi) = self.s_range;
        for t in [t0, t1] {
            if !(t >= lo && t <= hi) {
                return Err(Error::ParameterOutOfRange { t, lo, hi });
            }
        }
        Ok(t1 - t0)
    }
}
