//! Analytic aesthetic curves: superspirals, log-aesthetic curves, intrinsic-equation curves,
//! and Hermite sampling of them.

mod hermite;
mod intrinsic;
mod superspiral;

pub use hermite::{sample_hermite, HermiteNode, HermiteTable};
pub use intrinsic::{integrate_intrinsic, lac_curvature, CurvatureFn, IntrinsicCurve, LacParams};
pub use superspiral::{superspiral_arclength, superspiral_point, superspiral_radius, Superspiral, SuperspiralParams};

use serde::{Deserialize, Serialize};

use crate::curve::{CurveGeometry, Frame};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::numerics::ToleranceConfig;

/// Sample parameters with geometrically graded increments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSchedule {
    pub n_points: usize,
    pub t0: f64,
    pub h_first: f64,
    pub h_last: f64,
}

impl SampleSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::InvalidInput(format!("schedule needs at least 2 points, got {}", self.n_points)));
        }
        if !(self.h_first > 0.0
            && self.h_last > 0.0
            && self.t0.is_finite()
            && self.h_first.is_finite()
            && self.h_last.is_finite())
        {
            return Err(Error::InvalidInput("schedule increments must be positive".into()));
        }
        Ok(())
    }
}

/// `t0, t0 + h1, ...` with `h_i = h_first * r^(i-1)` grading from `h_first` to `h_last`.
pub fn build_schedule(sched: &SampleSchedule) -> Result<Vec<f64>> {
    sched.validate()?;
    let n = sched.n_points;
    let mut out = Vec::with_capacity(n);
    out.push(sched.t0);
    if n == 2 {
        out.push(sched.t0 + sched.h_first);
        return Ok(out);
    }
    let ratio = (sched.h_last / sched.h_first).powf(1.0 / (n - 2) as f64);
    let mut t = sched.t0;
    for i in 0..n - 1 {
        let h = if i == n - 2 { sched.h_last } else { sched.h_first * ratio.powi(i as i32) };
        t += h;
        out.push(t);
    }
    Ok(out)
}

/// Serializable description of an analytic curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AnalyticCurveSpec {
    Superspiral {
        params: SuperspiralParams,
        /// Tangent-angle range.
        range: [f64; 2],
    },
    Lac {
        params: LacParams,
        /// Arc-length range of the curvature law.
        range: [f64; 2],
        #[serde(default)]
        theta0: f64,
        #[serde(default)]
        origin: Vec2,
    },
}

impl AnalyticCurveSpec {
    pub fn range(&self) -> (f64, f64) {
        match self {
            AnalyticCurveSpec::Superspiral { range, .. } | AnalyticCurveSpec::Lac { range, .. } => (range[0], range[1]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.range();
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidInput(format!("invalid curve range [{lo}, {hi}]")));
        }
        match self {
            AnalyticCurveSpec::Superspiral { params, .. } => {
                params.validate()?;
                if lo < 0.0 {
                    return Err(Error::Domain("superspiral range must start at theta >= 0".into()));
                }
            }
            AnalyticCurveSpec::Lac { params, .. } => {
                lac_curvature(params, lo)?;
                lac_curvature(params, hi)?;
            }
        }
        Ok(())
    }

    pub fn build(&self, cfg: &ToleranceConfig) -> Result<AnalyticCurve> {
        self.validate()?;
        Ok(match *self {
            AnalyticCurveSpec::Superspiral { params, range } => {
                AnalyticCurve::Superspiral(Superspiral::new(params, (range[0], range[1]), *cfg)?)
            }
            AnalyticCurveSpec::Lac { params, range, theta0, origin } => {
                AnalyticCurve::Intrinsic(IntrinsicCurve::lac(params, (range[0], range[1]), theta0, origin, cfg)?)
            }
        })
    }
}

#[derive(Debug, Clone)]
pub enum AnalyticCurve {
    Superspiral(Superspiral),
    Intrinsic(IntrinsicCurve),
}

impl CurveGeometry for AnalyticCurve {
    fn domain(&self) -> (f64, f64) {
        match self {
            AnalyticCurve::Superspiral(c) => c.domain(),
            AnalyticCurve::Intrinsic(c) => c.domain(),
        }
    }

    fn frame(&self, t: f64) -> Result<Frame> {
        match self {
            AnalyticCurve::Superspiral(c) => c.frame(t),
            AnalyticCurve::Intrinsic(c) => c.frame(t),
        }
    }

    fn point(&self, t: f64) -> Result<Vec2> {
        match self {
            AnalyticCurve::Superspiral(c) => c.point(t),
            AnalyticCurve::Intrinsic(c) => c.point(t),
        }
    }

    fn arc_length(&self, t0: f64, t1: f64, cfg: &ToleranceConfig) -> Result<f64> {
        match self {
            AnalyticCurve::Superspiral(c) => c.arc_length(t0, t1, cfg),
            AnalyticCurve::Intrinsic(c) => c.arc_length(t0, t1, cfg),
        }
    }
}
