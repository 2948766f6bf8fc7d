//! Hermite data: per-node position, derivative and curvature, plus inter-node arc lengths.

use serde::{Deserialize, Serialize};

use crate::curve::CurveGeometry;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::numerics::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiteNode {
    pub point: Vec2,
    /// First derivative with respect to the source curve's parameter.
    pub derivative: Vec2,
    /// Curvature magnitude.
    pub curvature: f64,
    /// Unit vector toward the center of curvature; absent where the curvature is zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<Vec2>,
}

impl HermiteNode {
    pub fn unit_tangent(&self) -> Option<Vec2> {
        self.derivative.normalized()
    }

    /// Curvature with sign: positive when the normal points to the left of the tangent.
    pub fn signed_curvature(&self) -> f64 {
        match (self.normal, self.unit_tangent()) {
            (Some(n), Some(t)) if self.curvature != 0.0 => self.curvature * t.cross(n).signum(),
            _ => 0.0,
        }
    }

    /// Builds a node from a derivative vector and a signed curvature.
    pub fn from_signed(point: Vec2, derivative: Vec2, signed_curvature: f64) -> Self {
        let normal = if signed_curvature != 0.0 {
            derivative.normalized().map(|t| t.perp() * signed_curvature.signum())
        } else {
            None
        };
        let curvature = if normal.is_some() { signed_curvature.abs() } else { 0.0 };
        Self { point, derivative, curvature, normal }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteTable {
    pub nodes: Vec<HermiteNode>,
    /// Arc length of each gap between consecutive nodes; for closed tables the last
    /// entry is the gap from the final node back to the first.
    pub arc_lengths: Vec<f64>,
    #[serde(default)]
    pub closed: bool,
}

impl HermiteTable {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.arc_lengths.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if n < 2 {
            return Err(Error::InvalidInput(format!("hermite table needs at least 2 nodes, has {n}")));
        }
        let gaps = if self.closed { n } else { n - 1 };
        if self.arc_lengths.len() != gaps {
            return Err(Error::InvalidInput(format!(
                "hermite table with {n} nodes needs {gaps} arc lengths, has {}",
                self.arc_lengths.len()
            )));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if !(node.point.is_finite() && node.derivative.is_finite()) {
                return Err(Error::InvalidInput(format!("hermite node {i} is not finite")));
            }
            if !(node.curvature >= 0.0 && node.curvature.is_finite()) {
                return Err(Error::InvalidInput(format!("hermite node {i} curvature must be >= 0")));
            }
            let t = node
                .unit_tangent()
                .ok_or_else(|| Error::InvalidInput(format!("hermite node {i} has a zero derivative")))?;
            if let Some(nv) = node.normal {
                if (nv.norm() - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidInput(format!("hermite node {i} normal is not a unit vector")));
                }
                if t.dot(nv).abs() > 1e-9 {
                    return Err(Error::InvalidInput(format!(
                        "hermite node {i} normal is not perpendicular to the tangent"
                    )));
                }
            } else if node.curvature != 0.0 {
                return Err(Error::InvalidInput(format!("hermite node {i} has curvature but no normal")));
            }
        }
        if let Some(i) = self.arc_lengths.iter().position(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidInput(format!("hermite arc length {i} must be positive")));
        }
        Ok(())
    }
}

/// Relative curvature below which a node is recorded as straight.
const ZERO_CURVATURE: f64 = 1e-14;

/// Samples Hermite data from a curve at the given parameters (strictly increasing).
pub fn sample_hermite<C: CurveGeometry + ?Sized>(
    curve: &C,
    params: &[f64],
    cfg: &ToleranceConfig,
) -> Result<HermiteTable> {
    if params.len() < 2 {
        return Err(Error::InvalidInput("at least two sample parameters are required".into()));
    }
    if params.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("sample parameters must be strictly increasing".into()));
    }
    let mut nodes = Vec::with_capacity(params.len());
    let mut arc_lengths = Vec::with_capacity(params.len() - 1);
    for (i, &t) in params.iter().enumerate() {
        let f = curve.frame(t)?;
        let v = f.speed();
        if !(v > 0.0) {
            return Err(Error::SingularCurve { t });
        }
        let k = f.d1.cross(f.d2) / (v * v * v);
        let k = if k.is_finite() { k } else { 0.0 };
        nodes.push(HermiteNode::from_signed(f.point, f.d1, k));
        if i > 0 {
            arc_lengths.push(curve.arc_length(params[i - 1], t, cfg)?);
        }
    }
    let scale = arc_lengths.iter().sum::<f64>();
    for n in &mut nodes {
        if n.curvature * scale < ZERO_CURVATURE {
            n.curvature = 0.0;
            n.normal = None;
        }
    }
    let table = HermiteTable { nodes, arc_lengths, closed: false };
    table.validate()?;
    Ok(table)
}
