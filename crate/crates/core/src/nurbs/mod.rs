//! NURBS curves: evaluation, derivatives, knot insertion, segment extraction,
//! topology conversion and construction from Hermite data.

mod curve;
pub(crate) mod fit;
mod hermite;
mod profile;
mod segments;

pub use curve::{NurbsCurve, Side};
pub use hermite::{approximate_hermite, bspline_from_hermite, nurbzs_from_hermite, CURVATURE_RESIDUAL_LIMIT};
pub use profile::{auto_comb_scale, curvature_profile, CurvatureSample};
pub use segments::{extract_segments, set_topology, set_topology_with_tol, Topology, DEFAULT_SNAP_TOL};
