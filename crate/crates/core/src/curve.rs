//! Common interface for parametric planar curves.

use crate::error::Result;
use crate::geom::Vec2;
use crate::numerics::{integrate, ToleranceConfig};

/// Position and the first three parametric derivatives at one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub point: Vec2,
    pub d1: Vec2,
    pub d2: Vec2,
    pub d3: Vec2,
}

impl Frame {
    pub fn speed(&self) -> f64 {
        self.d1.norm()
    }

    /// Signed curvature, positive when turning left. `None` where the speed vanishes.
    pub fn curvature(&self) -> Option<f64> {
        let v = self.speed();
        (v > 0.0).then(|| self.d1.cross(self.d2) / (v * v * v))
    }

    /// Derivative of signed curvature with respect to arc length.
    pub fn curvature_rate(&self) -> Option<f64> {
        let v = self.speed();
        if v <= 0.0 {
            return None;
        }
        let v2 = v * v;
        let dk_dt =
            self.d1.cross(self.d3) / (v2 * v) - 3.0 * self.d1.cross(self.d2) * self.d1.dot(self.d2) / (v2 * v2 * v);
        Some(dk_dt / v)
    }

    pub fn unit_tangent(&self) -> Option<Vec2> {
        self.d1.normalized()
    }
}

pub trait CurveGeometry {
    /// Parameter interval `[lo, hi]`.
    fn domain(&self) -> (f64, f64);

    fn frame(&self, t: f64) -> Result<Frame>;

    fn point(&self, t: f64) -> Result<Vec2> {
        Ok(self.frame(t)?.point)
    }

    /// Sorted parameters where derivatives may be discontinuous, including both domain ends.
    fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.domain();
        vec![lo, hi]
    }

    /// True if the curve is a closed loop (start and end coincide with matching tangents).
    fn is_closed(&self) -> bool {
        false
    }

    fn arc_length(&self, t0: f64, t1: f64, cfg: &ToleranceConfig) -> Result<f64> {
        let (a, b, sign) = if t0 <= t1 { (t0, t1, 1.0) } else { (t1, t0, -1.0) };
        let mut knots: Vec<f64> = self.breakpoints().into_iter().filter(|&k| k > a && k < b).collect();
        knots.insert(0, a);
        knots.push(b);
        let mut total = 0.0;
        for w in knots.windows(2) {
            let mut err = None;
            let r = integrate(
                |t| match self.frame(t) {
                    Ok(f) => f.speed(),
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                },
                w[0],
                w[1],
                cfg,
            )?;
            if let Some(e) = err {
                return Err(e);
            }
            total += r.value;
        }
        Ok(sign * total)
    }
}

impl<C: CurveGeometry + ?Sized> CurveGeometry for &C {
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
    fn frame(&self, t: f64) -> Result<Frame> {
        (**self).frame(t)
    }
    fn point(&self, t: f64) -> Result<Vec2> {
        (**self).point(t)
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
    fn is_closed(&self) -> bool {
        (**self).is_closed()
    }
    fn arc_length(&self, t0: f64, t1: f64, cfg: &ToleranceConfig) -> Result<f64> {
        (**self).arc_length(t0, t1, cfg)
    }
}

/// `n` parameters uniformly spaced over the domain, both ends included.
pub fn uniform_parameters(domain: (f64, f64), n: usize) -> Vec<f64> {
    let (lo, hi) = domain;
    if n < 2 {
        return vec![lo];
    }
    (0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}
