//! Request and response types for the kernel operations, shared by the HTTP service
//! and the command line. Handlers are pure: the same request gives the same response
//! apart from `diagnostics.timings_ms`.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analytic::{build_schedule, sample_hermite, AnalyticCurveSpec, SampleSchedule};
use crate::curve::{uniform_parameters, CurveGeometry};
use crate::error::{Error, Result};
use crate::fairing::{hermite_of, vcurve as fair, FairingConfig, HermiteStations, Polyline};
use crate::io::{write_dxf, EntityValue, ModelDocument, Units};
use crate::numerics::ToleranceConfig;
use crate::nurbs::{approximate_hermite, curvature_profile, extract_segments, CurvatureSample, NurbsCurve, Topology};
use crate::quality::quality_report;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn default_profile() -> usize {
    256
}

fn default_points() -> usize {
    16
}

fn default_samples() -> usize {
    100
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<f64>,
    /// Wall-clock milliseconds per stage.
    #[serde(default)]
    pub timings_ms: BTreeMap<String, f64>,
}

impl Diagnostics {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f();
        self.timings_ms.insert(stage.into(), start.elapsed().as_secs_f64() * 1e3);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiResponse {
    /// Result entities only.
    pub model: ModelDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<CurvatureSample>>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

impl From<&Error> for ErrorBody {
    fn from(e: &Error) -> Self {
        Self { code: e.code().into(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
}

pub fn health() -> Health {
    Health { status: "ok".into(), version: VERSION.into() }
}

/// Parses a request body and validates the model it carries.
pub fn parse_request<T: for<'de> Deserialize<'de> + HasModel>(text: &str) -> Result<T> {
    let req: T = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    if let Some(m) = req.model() {
        m.validate()?;
    }
    Ok(req)
}

pub trait HasModel {
    fn model(&self) -> Option<&ModelDocument>;
}

macro_rules! has_model {
    ($($t:ty),*) => {$(
        impl HasModel for $t {
            fn model(&self) -> Option<&ModelDocument> {
                Some(&self.model)
            }
        }
    )*};
}

has_model!(VcurveRequest, ApproxRequest, ExtractRequest, MetricsRequest, ExportRequest);

impl HasModel for AnalyticRequest {
    fn model(&self) -> Option<&ModelDocument> {
        None
    }
}

/// Fairs polyline `id`. Results: `<out>.curve`, `<out>.hermite`, `<out>.quality`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcurveRequest {
    pub model: ModelDocument,
    pub id: String,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub config: FairingConfig,
    /// Hermite stations uniform in arc length; the polyline nodes when absent.
    #[serde(default)]
    pub hermite_points: Option<usize>,
    #[serde(default = "default_profile")]
    pub profile_samples: usize,
}

pub fn vcurve(req: &VcurveRequest) -> Result<ApiResponse> {
    let poly: &Polyline = req.model.polyline(&req.id)?;
    let prefix = req.out.as_deref().unwrap_or(&req.id);
    let mut diag = Diagnostics::default();
    let faired = diag.time("fairing", || fair(poly, &req.config))?;
    diag.iterations = Some(faired.iterations);
    diag.functional = Some(faired.functional);
    let stations = req.hermite_points.map_or(HermiteStations::VertexNodes, HermiteStations::Uniform);
    let table = diag.time("hermite", || hermite_of(&faired, stations))?;
    let report = diag.time("quality", || quality_report(&faired.curve, None))?;
    let profile = diag.time("profile", || curvature_profile(&faired.curve, req.profile_samples, None))?;
    let mut model = ModelDocument::new(req.model.units);
    model.push(format!("{prefix}.curve"), EntityValue::NurbsCurve(faired.curve))?;
    model.push(format!("{prefix}.hermite"), EntityValue::HermiteTable(table))?;
    model.push(format!("{prefix}.quality"), EntityValue::QualityReport(report))?;
    Ok(ApiResponse { model, profile: Some(profile), diagnostics: diag })
}

/// Samples an analytic curve. Results: `<id>` (the spec), `<id>.hermite`, `<id>.samples`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticRequest {
    pub spec: AnalyticCurveSpec,
    /// Graded Hermite stations; `points` stations uniform over the range when absent.
    #[serde(default)]
    pub schedule: Option<SampleSchedule>,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_analytic_id")]
    pub id: String,
    /// Points of the sampled polyline, uniform in the curve parameter.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub units: Units,
}

fn default_analytic_id() -> String {
    "analytic".into()
}

pub fn analytic(req: &AnalyticRequest) -> Result<ApiResponse> {
    let cfg = ToleranceConfig::default();
    let mut diag = Diagnostics::default();
    let curve = diag.time("build", || req.spec.build(&cfg))?;
    let (lo, hi) = req.spec.range();
    let params = match &req.schedule {
        Some(s) => build_schedule(s)?,
        None => {
            if req.points < 2 {
                return Err(Error::InvalidInput(format!("at least 2 points required, got {}", req.points)));
            }
            uniform_parameters((lo, hi), req.points)
        }
    };
    let end = *params.last().unwrap();
    if params[0] < lo || end > hi {
        return Err(Error::ParameterOutOfRange { t: if params[0] < lo { params[0] } else { end }, lo, hi });
    }
    let table = diag.time("hermite", || sample_hermite(&curve, &params, &cfg))?;
    if req.samples < 3 {
        return Err(Error::InvalidInput(format!("at least 3 samples required, got {}", req.samples)));
    }
    let points = diag.time("samples", || {
        uniform_parameters((lo, hi), req.samples).into_iter().map(|t| curve.point(t)).collect::<Result<Vec<_>>>()
    })?;
    let mut model = ModelDocument::new(req.units);
    model.push(req.id.clone(), EntityValue::AnalyticCurve(req.spec.clone()))?;
    model.push(format!("{}.hermite", req.id), EntityValue::HermiteTable(table))?;
    model.push(format!("{}.samples", req.id), EntityValue::Polyline(Polyline::support(points, Topology::Open)))?;
    model.validate()?;
    Ok(ApiResponse { model, profile: None, diagnostics: diag })
}

/// Converts Hermite table `id` to degree 3 (NURBzS) or 6, 8, 10 (B-spline), optionally
/// clipping end segments. Results: `<out>.curve`, `<out>.quality`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxRequest {
    pub model: ModelDocument,
    pub id: String,
    pub degree: usize,
    #[serde(default)]
    pub clip_start: usize,
    #[serde(default)]
    pub clip_end: usize,
    /// Analytic curve or NURBS entity to measure deviation against.
    #[serde(default)]
    pub reference: Option<String>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default = "default_profile")]
    pub profile_samples: usize,
}

/// A reference curve from the model: an analytic spec is built, a NURBS curve used as is.
fn reference_curve(model: &ModelDocument, id: &str) -> Result<Box<dyn CurveGeometry>> {
    match model.get(id) {
        Some(EntityValue::AnalyticCurve(spec)) => Ok(Box::new(spec.build(&ToleranceConfig::default())?)),
        Some(EntityValue::NurbsCurve(c)) => Ok(Box::new(c.clone())),
        Some(other) => {
            Err(Error::Model { entity: id.into(), message: format!("a {} cannot be a reference curve", other.kind()) })
        }
        None => Err(Error::Model { entity: id.into(), message: "no such entity".into() }),
    }
}

fn clip(curve: NurbsCurve, start: usize, end: usize) -> Result<NurbsCurve> {
    if start == 0 && end == 0 {
        return Ok(curve);
    }
    let total = curve.segment_count();
    let count = total.saturating_sub(start + end);
    extract_segments(&curve, start, count).map_err(|_| Error::SegmentRange {
        start,
        count: total.saturating_sub(start),
        total,
    })
}

pub fn approx(req: &ApproxRequest) -> Result<ApiResponse> {
    let table = req.model.hermite_table(&req.id)?;
    let prefix = req.out.as_deref().unwrap_or(&req.id);
    let reference = req.reference.as_deref().map(|r| reference_curve(&req.model, r)).transpose()?;
    let mut diag = Diagnostics::default();
    let curve = diag.time("approx", || approximate_hermite(table, req.degree))?;
    let curve = clip(curve, req.clip_start, req.clip_end)?;
    let report = diag.time("quality", || quality_report(&curve, reference.as_deref()))?;
    let profile = diag.time("profile", || curvature_profile(&curve, req.profile_samples, None))?;
    let mut model = ModelDocument::new(req.model.units);
    model.push(format!("{prefix}.curve"), EntityValue::NurbsCurve(curve))?;
    model.push(format!("{prefix}.quality"), EntityValue::QualityReport(report))?;
    Ok(ApiResponse { model, profile: Some(profile), diagnostics: diag })
}

/// Segments `start .. start + count` of curve `id`. Result: `<out>`, default `<id>.extract`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractRequest {
    pub model: ModelDocument,
    pub id: String,
    pub start: usize,
    pub count: usize,
    #[serde(default)]
    pub out: Option<String>,
}

pub fn extract(req: &ExtractRequest) -> Result<ApiResponse> {
    let curve = req.model.nurbs_curve(&req.id)?;
    let mut diag = Diagnostics::default();
    let piece = diag.time("extract", || extract_segments(curve, req.start, req.count))?;
    let mut model = ModelDocument::new(req.model.units);
    let out = req.out.clone().unwrap_or_else(|| format!("{}.extract", req.id));
    model.push(out, EntityValue::NurbsCurve(piece))?;
    Ok(ApiResponse { model, profile: None, diagnostics: diag })
}

/// Quality report of curve `id`. Result: `<out>`, default `<id>.quality`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRequest {
    pub model: ModelDocument,
    pub id: String,
    #[serde(default)]
    pub reference: Option<String>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default = "default_profile")]
    pub profile_samples: usize,
}

pub fn metrics(req: &MetricsRequest) -> Result<ApiResponse> {
    let curve = req.model.nurbs_curve(&req.id)?;
    let reference = req.reference.as_deref().map(|r| reference_curve(&req.model, r)).transpose()?;
    let mut diag = Diagnostics::default();
    let report = diag.time("quality", || quality_report(curve, reference.as_deref()))?;
    let profile = diag.time("profile", || curvature_profile(curve, req.profile_samples, None))?;
    let mut model = ModelDocument::new(req.model.units);
    let out = req.out.clone().unwrap_or_else(|| format!("{}.quality", req.id));
    model.push(out, EntityValue::QualityReport(report))?;
    Ok(ApiResponse { model, profile: Some(profile), diagnostics: diag })
}

/// DXF text of the listed curves, or of every NURBS entity in document order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportRequest {
    pub model: ModelDocument,
    #[serde(default)]
    pub ids: Option<Vec<String>>,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

pub fn export_dxf(req: &ExportRequest) -> Result<String> {
    let curves: Vec<NurbsCurve> = match &req.ids {
        Some(ids) => ids.iter().map(|id| req.model.nurbs_curve(id).cloned()).collect::<Result<_>>()?,
        None => req.model.curves().map(|(_, c)| c.clone()).collect(),
    };
    write_dxf(&curves, req.model.units, req.scale)
}
