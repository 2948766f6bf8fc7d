use thiserror::Error;

use crate::numerics::QuadratureResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used for CLI exit codes and HTTP status mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    NonConvergence,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("integrand is not finite at x = {at}")]
    NonFiniteIntegrand { at: f64 },

    #[error(
        "quadrature did not converge: best estimate {} with error {} after {} subdivisions",
        best.value, best.error_estimate, best.subdivisions
    )]
    QuadratureNonConvergence { best: QuadratureResult },

    #[error("hypergeometric parameter c = {c} is zero or a negative integer")]
    HypergeometricDomain { c: f64 },

    #[error("hypergeometric series does not converge for z = {z} (transformed argument {w})")]
    HypergeometricPrecision { z: f64, w: f64 },

    #[error("no sign change on [{a}, {b}]: f(a) = {fa}, f(b) = {fb}")]
    NoSignChange { a: f64, b: f64, fa: f64, fb: f64 },

    #[error("polyline has {got} vertices, at least {need} required")]
    PolylineTooShort { got: usize, need: usize },

    #[error("polyline vertices {index} and {next} coincide")]
    DegenerateEdge { index: usize, next: usize },

    #[error("closed tangent polygon is not convex")]
    TangentNotConvex,

    #[error("degree {0} is not supported (use 3, 6, 8 or 10)")]
    DegreeNotSupported(usize),

    #[error("fairing did not converge after {iterations} iterations (functional {functional})")]
    FairingNonConvergence { iterations: usize, functional: f64, best: Box<crate::fairing::FairedCurve> },

    #[error("hermite segment {segment}: {reason}")]
    HermiteSegment { segment: usize, reason: String },

    #[error("node curvature residual {residual} exceeds the allowed {allowed}")]
    CurvatureResidual { residual: f64, allowed: f64 },

    #[error("parameter {t} outside curve domain [{lo}, {hi}]")]
    ParameterOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("segment range {start}+{count} exceeds {total} segments")]
    SegmentRange { start: usize, count: usize, total: usize },

    #[error("curve endpoints are {gap} apart, cannot close (snap tolerance {tol})")]
    EndpointGap { gap: f64, tol: f64 },

    #[error("curve is singular (vanishing first derivative) at t = {t}")]
    SingularCurve { t: f64 },

    #[error("closest-point projection failed for sample {sample}")]
    ProjectionFailed { sample: usize },

    #[error("linear system is singular: {0}")]
    SingularSystem(String),

    #[error("dxf parse error at line {line}: {message}")]
    DxfParse { line: usize, message: String },

    #[error("model error in entity '{entity}': {message}")]
    Model { entity: String, message: String },

    /// An entity of a model document violates its invariants.
    #[error("entity '{entity}': {source}")]
    Entity { entity: String, source: Box<Error> },

    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Entity { source, .. } => source.class(),
            Error::QuadratureNonConvergence { .. }
            | Error::FairingNonConvergence { .. }
            | Error::HypergeometricPrecision { .. } => ErrorClass::NonConvergence,
            Error::Io(_) => ErrorClass::Io,
            _ => ErrorClass::Validation,
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Entity { source, .. } => source.code(),
            Error::PolylineTooShort { .. } => "POLYLINE_TOO_SHORT",
            Error::TangentNotConvex => "TANGENT_NOT_CONVEX",
            Error::HypergeometricDomain { .. } => "HYPERGEOMETRIC_DOMAIN",
            Error::DegreeNotSupported(_) => "DEGREE_NOT_SUPPORTED",
            Error::QuadratureNonConvergence { .. }
            | Error::FairingNonConvergence { .. }
            | Error::HypergeometricPrecision { .. } => "NUMERIC_NONCONVERGENCE",
            Error::DegenerateEdge { .. } => "POLYLINE_DEGENERATE",
            Error::ParameterOutOfRange { .. } | Error::SegmentRange { .. } => "OUT_OF_RANGE",
            Error::EndpointGap { .. } => "ENDPOINT_GAP",
            Error::DxfParse { .. } => "DXF_PARSE",
            Error::Model { .. } | Error::ModelFormat(_) => "MODEL_INVALID",
            Error::Io(_) => "IO_ERROR",
            _ => "INVALID_INPUT",
        }
    }
}
