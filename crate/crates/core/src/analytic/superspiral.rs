//! Superspirals: radius of curvature given by a Gauss hypergeometric function of the
//! tangent angle.
//!
//! With tangent angle `theta` as parameter, `rho(theta) = scale * 2F1(a, b; c; -theta)`
//! and the curve is `r(theta) = integral_0^theta rho(t) (cos t, sin t) dt`. The clothoid
//! is the case `(a, b, c) = (0.5, 1, 1)`.

use serde::{Deserialize, Serialize};

use crate::curve::{CurveGeometry, Frame};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::numerics::{gauss_2f1, integrate_vec, ToleranceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperspiralParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl SuperspiralParams {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c, scale: 1.0 }
    }

    pub fn clothoid() -> Self {
        Self::new(0.5, 1.0, 1.0)
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::InvalidInput("superspiral a, b must be finite".into()));
        }
        if !self.c.is_finite() || (self.c <= 0.0 && self.c == self.c.round()) {
            return Err(Error::HypergeometricDomain { c: self.c });
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidInput(format!("superspiral scale must be positive, got {}", self.scale)));
        }
        Ok(())
    }

    /// True when the radius is positive and strictly decreasing for all θ ≥ 0, so curvature
    /// grows monotonically: `a, b > 0` and `c > min(a, b)` (Euler integral with a positive kernel).
    pub fn is_monotone_family(&self) -> bool {
        self.a > 0.0 && self.b > 0.0 && self.c > self.a.min(self.b)
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta >= 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("superspiral tangent angle must be >= 0, got {theta}")))
    }
}

/// Radius of curvature `rho(theta)`.
pub fn superspiral_radius(p: &SuperspiralParams, theta: f64) -> Result<f64> {
    p.validate()?;
    check_theta(theta)?;
    Ok(p.scale * gauss_2f1(p.a, p.b, p.c, -theta)?)
}

/// `rho`, `d rho / d theta`, `d^2 rho / d theta^2`.
fn radius_derivs(p: &SuperspiralParams, theta: f64) -> Result<[f64; 3]> {
    let (a, b, c) = (p.a, p.b, p.c);
    let z = -theta;
    let f0 = gauss_2f1(a, b, c, z)?;
    let k1 = a * b / c;
    let f1 = if k1 == 0.0 { 0.0 } else { k1 * gauss_2f1(a + 1.0, b + 1.0, c + 1.0, z)? };
    let k2 = k1 * (a + 1.0) * (b + 1.0) / (c + 1.0);
    let f2 = if k2 == 0.0 { 0.0 } else { k2 * gauss_2f1(a + 2.0, b + 2.0, c + 2.0, z)? };
    // d/dtheta = -d/dz
    Ok([p.scale * f0, -p.scale * f1, p.scale * f2])
}

/// `[x, y, s]` integrated over `[t0, t1]`.
fn integrate_span(p: &SuperspiralParams, t0: f64, t1: f64, cfg: &ToleranceConfig) -> Result<[f64; 3]> {
    let mut failure = None;
    let r = integrate_vec(
        |t| match gauss_2f1(p.a, p.b, p.c, -t) {
            Ok(f) => {
                let rho = p.scale * f;
                let (s, c) = t.sin_cos();
                [rho * c, rho * s, rho]
            }
            Err(e) => {
                failure.get_or_insert(e);
                [0.0; 3]
            }
        },
        t0,
        t1,
        cfg,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

/// Point at tangent angle `theta`; the curve starts at the origin heading along +x.
pub fn superspiral_point(p: &SuperspiralParams, theta: f64, cfg: &ToleranceConfig) -> Result<Vec2> {
    p.validate()?;
    check_theta(theta)?;
    let v = integrate_span(p, 0.0, theta, cfg)?;
    Ok(Vec2::new(v[0], v[1]))
}

/// Arc length from `theta = 0`.
pub fn superspiral_arclength(p: &SuperspiralParams, theta: f64, cfg: &ToleranceConfig) -> Result<f64> {
    p.validate()?;
    check_theta(theta)?;
    Ok(integrate_span(p, 0.0, theta, cfg)?[2])
}

const CACHE_INTERVALS: usize = 64;

/// A superspiral restricted to a tangent-angle range, with cached positions at
/// evenly spaced breakpoints so that point queries only integrate a short span.
#[derive(Debug, Clone)]
pub struct Superspiral {
    params: SuperspiralParams,
    range: (f64, f64),
    cfg: ToleranceConfig,
    /// (theta, [x, y, s]) at breakpoints.
    cache: Vec<(f64, [f64; 3])>,
}

impl Superspiral {
    pub fn new(params: SuperspiralParams, range: (f64, f64), cfg: ToleranceConfig) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        let (t0, t1) = range;
        check_theta(t0)?;
        if !(t1 > t0 && t1.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid superspiral range [{t0}, {t1}]")));
        }
        let start = integrate_span(&params, 0.0, t0, &cfg)?;
        let mut cache = Vec::with_capacity(CACHE_INTERVALS + 1);
        cache.push((t0, start));
        let mut acc = start;
        for i in 1..=CACHE_INTERVALS {
            let a = cache[i - 1].0;
            let b = if i == CACHE_INTERVALS { t1 } else { t0 + (t1 - t0) * i as f64 / CACHE_INTERVALS as f64 };
            let d = integrate_span(&params, a, b, &cfg)?;
            for k in 0..3 {
                acc[k] += d[k];
            }
            cache.push((b, acc));
        }
        Ok(Self { params, range, cfg, cache })
    }

    pub fn params(&self) -> &SuperspiralParams {
        &self.params
    }

    fn locate(&self, theta: f64) -> Result<[f64; 3]> {
        let (lo, hi) = self.range;
        if !(theta >= lo && theta <= hi) {
            return Err(Error::ParameterOutOfRange { t: theta, lo, hi });
        }
        let h = (hi - lo) / CACHE_INTERVALS as f64;
        let k = (((theta - lo) / h).floor() as usize).min(CACHE_INTERVALS - 1);
        let (base_t, base) = self.cache[k];
        let d = integrate_span(&self.params, base_t, theta.max(base_t), &self.cfg)?;
        Ok([base[0] + d[0], base[1] + d[1], base[2] + d[2]])
    }

    /// Arc length from `theta = 0`.
    pub fn arclength_at(&self, theta: f64) -> Result<f64> {
        Ok(self.locate(theta)?[2])
    }

    pub fn radius(&self, theta: f64) -> Result<f64> {
        superspiral_radius(&self.params, theta)
    }

    pub fn curvature(&self, theta: f64) -> Result<f64> {
        Ok(1.0 / self.radius(theta)?)
    }
}

impl CurveGeometry for Superspiral {
    fn domain(&self) -> (f64, f64) {
        self.range
    }

    fn frame(&self, theta: f64) -> Result<Frame> {
        let v = self.locate(theta)?;
        let [rho, drho, d2rho] = radius_derivs(&self.params, theta)?;
        let e = Vec2::from_angle(theta);
        let n = e.perp();
        Ok(Frame {
            point: Vec2::new(v[0], v[1]),
            d1: e * rho,
            d2: e * drho + n * rho,
            d3: e * (d2rho - rho) + n * (2.0 * drho),
        })
    }

    fn point(&self, theta: f64) -> Result<Vec2> {
        let v = self.locate(theta)?;
        Ok(Vec2::new(v[0], v[1]))
    }

    fn arc_length(&self, t0: f64, t1: f64, _cfg: &ToleranceConfig) -> Result<f64> {
        Ok(self.locate(t1)?[2] - self.locate(t0)?[2])
    }
}
