//! Curvature profile and comb data.

use serde::{Deserialize, Serialize};

use super::curve::NurbsCurve;
use crate::curve::{uniform_parameters, CurveGeometry};
use crate::error::{Error, Result};
use crate::geom::{bbox_diagonal, Vec2};
use crate::numerics::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub t: f64,
    /// Arc length from the start of the domain.
    pub s: f64,
    pub point: Vec2,
    /// Signed curvature, `None` where the first derivative vanishes.
    pub kappa: Option<f64>,
    /// Tip of the comb tooth, drawn away from the center of curvature.
    pub comb_end: Option<Vec2>,
}

/// Comb scale that makes the tallest tooth 10% of the control-polygon diagonal.
pub fn auto_comb_scale(curve: &NurbsCurve, samples: &[CurvatureSample]) -> f64 {
    let kmax = samples.iter().filter_map(|s| s.kappa).fold(0.0f64, |m, k| m.max(k.abs()));
    if kmax > 0.0 {
        0.1 * bbox_diagonal(curve.control_points().iter().copied()) / kmax
    } else {
        1.0
    }
}

/// `n` samples uniform in parameter with cumulative arc length and comb endpoints.
/// A `None` comb scale selects [`auto_comb_scale`].
pub fn curvature_profile(curve: &NurbsCurve, n: usize, comb_scale: Option<f64>) -> Result<Vec<CurvatureSample>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("curvature profile needs at least 2 samples, got {n}")));
    }
    let cfg = ToleranceConfig::default();
    let params = uniform_parameters(curve.domain(), n);
    let mut out: Vec<CurvatureSample> = Vec::with_capacity(n);
    let mut s = 0.0;
    for (i, &t) in params.iter().enumerate() {
        if i > 0 {
            s += curve.arc_length(params[i - 1], t, &cfg)?;
        }
        let f = curve.frame(t)?;
        let kappa = f.curvature().filter(|k| k.is_finite());
        out.push(CurvatureSample { t, s, point: f.point, kappa, comb_end: None });
    }
    let scale = comb_scale.unwrap_or_else(|| auto_comb_scale(curve, &out));
    for sample in &mut out {
        let f = curve.frame(sample.t)?;
        if let (Some(k), Some(tan)) = (sample.kappa, f.unit_tangent()) {
            sample.comb_end = Some(sample.point - tan.perp() * (scale * k));
        }
    }
    Ok(out)
}
