//! Python bindings. Curves are exposed as immutable objects; reports and profiles
//! come back as plain dicts with the same shape as the JSON model format.

use faircurve_core::analytic::{
    build_schedule, sample_hermite, AnalyticCurve, AnalyticCurveSpec, HermiteTable, LacParams, SampleSchedule,
    SuperspiralParams,
};
use faircurve_core::api;
use faircurve_core::curve::{uniform_parameters, CurveGeometry};
use faircurve_core::fairing::{self, FairingConfig, Functional, Polyline};
use faircurve_core::io::{self, Units};
use faircurve_core::numerics::{self, ToleranceConfig};
use faircurve_core::nurbs::{self, NurbsCurve, Topology};
use faircurve_core::quality;
use faircurve_core::{Error, ErrorClass, Vec2};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(faircurve, FaircurveError, PyException, "Base class; args are (code, message).");
create_exception!(faircurve, ValidationError, FaircurveError);
create_exception!(faircurve, NonConvergenceError, FaircurveError);
create_exception!(faircurve, StorageError, FaircurveError);

fn to_py_err(e: Error) -> PyErr {
    let args = (e.code(), e.to_string());
    match e.class() {
        ErrorClass::Validation => ValidationError::new_err(args),
        ErrorClass::NonConvergence => NonConvergenceError::new_err(args),
        ErrorClass::Io => StorageError::new_err(args),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for faircurve_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py_err)
    }
}

fn json_value<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn pair(v: Vec2) -> (f64, f64) {
    (v.x, v.y)
}

fn points(v: Vec<(f64, f64)>) -> Vec<Vec2> {
    v.into_iter().map(|(x, y)| Vec2::new(x, y)).collect()
}

fn units(name: &str) -> PyResult<Units> {
    serde_json::from_value(serde_json::Value::String(name.into()))
        .map_err(|_| PyValueError::new_err(format!("unknown units '{name}' (mm, cm, unitless)")))
}

fn curvature_at(c: &dyn CurveGeometry, t: f64) -> PyResult<Option<f64>> {
    Ok(c.frame(t).py()?.curvature())
}

#[pyclass(name = "NurbsCurve", module = "faircurve", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyNurbsCurve(NurbsCurve);

#[pymethods]
impl PyNurbsCurve {
    #[new]
    #[pyo3(signature = (degree, knots, control_points, weights=None, periodic=false))]
    fn new(
        degree: usize,
        knots: Vec<f64>,
        control_points: Vec<(f64, f64)>,
        weights: Option<Vec<f64>>,
        periodic: bool,
    ) -> PyResult<Self> {
        let weights = weights.unwrap_or_else(|| vec![1.0; control_points.len()]);
        NurbsCurve::from_knots(degree, knots, points(control_points), weights, periodic).py().map(Self)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let c: NurbsCurve = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        c.validate().py()?;
        Ok(Self(c))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn degree(&self) -> usize {
        self.0.degree()
    }

    #[getter]
    fn knots(&self) -> Vec<f64> {
        self.0.knots().to_vec()
    }

    #[getter]
    fn control_points(&self) -> Vec<(f64, f64)> {
        self.0.control_points().iter().copied().map(pair).collect()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights().to_vec()
    }

    #[getter]
    fn is_rational(&self) -> bool {
        self.0.is_rational()
    }

    #[getter]
    fn is_periodic(&self) -> bool {
        self.0.is_periodic()
    }

    #[getter]
    fn domain(&self) -> (f64, f64) {
        self.0.domain()
    }

    #[getter]
    fn segment_count(&self) -> usize {
        self.0.segment_count()
    }

    fn point(&self, t: f64) -> PyResult<(f64, f64)> {
        self.0.evaluate(t).py().map(pair)
    }

    /// Point and derivatives up to `order` at `t`.
    #[pyo3(signature = (t, order=2))]
    fn derivatives(&self, t: f64, order: usize) -> PyResult<Vec<(f64, f64)>> {
        Ok(self.0.derivatives(t, order).py()?.into_iter().map(pair).collect())
    }

    /// Signed curvature, or None where the curve is singular.
    fn curvature(&self, t: f64) -> PyResult<Option<f64>> {
        curvature_at(&self.0, t)
    }

    fn arc_length(&self) -> PyResult<f64> {
        let (a, b) = self.0.domain();
        self.0.arc_length(a, b, &ToleranceConfig::default()).py()
    }

    fn extract(&self, start: usize, count: usize) -> PyResult<Self> {
        nurbs::extract_segments(&self.0, start, count).py().map(Self)
    }

    fn scaled(&self, factor: f64) -> Self {
        Self(self.0.scaled(factor))
    }

    fn with_topology(&self, closed: bool) -> PyResult<Self> {
        let t = if closed { Topology::Closed } else { Topology::Open };
        nurbs::set_topology(&self.0, t).py().map(Self)
    }

    /// Curvature samples with comb tips, as a list of dicts.
    #[pyo3(signature = (samples=256, comb_scale=None))]
    fn profile<'py>(&self, py: Python<'py>, samples: usize, comb_scale: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
        json_value(py, &nurbs::curvature_profile(&self.0, samples, comb_scale).py()?)
    }

    /// Quality report as a dict; deviation fields need a reference curve.
    #[pyo3(signature = (reference=None))]
    fn quality<'py>(&self, py: Python<'py>, reference: Option<Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
        let report = match reference {
            None => quality::quality_report(&self.0, None),
            Some(r) => {
                if let Ok(c) = r.cast::<PyNurbsCurve>() {
                    quality::quality_report(&self.0, Some(&c.get().0))
                } else if let Ok(c) = r.cast::<PyAnalyticCurve>() {
                    quality::quality_report(&self.0, Some(&c.get().curve))
                } else {
                    return Err(PyValueError::new_err("reference must be a NurbsCurve or AnalyticCurve"));
                }
            }
        };
        json_value(py, &report.py()?)
    }

    fn __repr__(&self) -> String {
        let kind = if self.0.is_rational() { "rational" } else { "polynomial" };
        format!("NurbsCurve(degree={}, {} control points, {kind})", self.0.degree(), self.0.control_points().len())
    }
}

type NodeTuple = ((f64, f64), Option<(f64, f64)>, f64);

#[pyclass(name = "HermiteTable", module = "faircurve", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyHermiteTable(HermiteTable);

#[pymethods]
impl PyHermiteTable {
    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Nodes as `(point, unit_tangent, signed_curvature)` tuples.
    #[getter]
    fn nodes(&self) -> Vec<NodeTuple> {
        self.0.nodes.iter().map(|n| (pair(n.point), n.unit_tangent().map(pair), n.signed_curvature())).collect()
    }

    #[getter]
    fn arc_lengths(&self) -> Vec<f64> {
        self.0.arc_lengths.clone()
    }

    #[getter]
    fn total_length(&self) -> f64 {
        self.0.total_length()
    }

    /// Degree 3 gives a NURBzS; 6, 8 and 10 give a B-spline.
    fn approximate(&self, degree: usize) -> PyResult<PyNurbsCurve> {
        nurbs::approximate_hermite(&self.0, degree).py().map(PyNurbsCurve)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

#[pyclass(name = "AnalyticCurve", module = "faircurve", frozen)]
pub struct PyAnalyticCurve {
    spec: AnalyticCurveSpec,
    curve: AnalyticCurve,
}

impl PyAnalyticCurve {
    fn build(spec: AnalyticCurveSpec) -> PyResult<Self> {
        let curve = spec.build(&ToleranceConfig::default()).py()?;
        Ok(Self { spec, curve })
    }
}

#[pymethods]
impl PyAnalyticCurve {
    /// Superspiral with radius law `rho(theta) = scale * 2F1(a, b; c; -theta)`.
    #[staticmethod]
    #[pyo3(signature = (a, b, c, t0, t1, scale=1.0))]
    fn superspiral(a: f64, b: f64, c: f64, t0: f64, t1: f64, scale: f64) -> PyResult<Self> {
        let params = SuperspiralParams::new(a, b, c).with_scale(scale);
        Self::build(AnalyticCurveSpec::Superspiral { params, range: [t0, t1] })
    }

    /// Log-aesthetic curve over arc length `[s0, s1]`.
    #[staticmethod]
    #[pyo3(signature = (alpha, c0, c1, s0, s1, theta0=0.0))]
    fn lac(alpha: f64, c0: f64, c1: f64, s0: f64, s1: f64, theta0: f64) -> PyResult<Self> {
        Self::build(AnalyticCurveSpec::Lac {
            params: LacParams::new(alpha, c0, c1),
            range: [s0, s1],
            theta0,
            origin: Default::default(),
        })
    }

    #[getter]
    fn domain(&self) -> (f64, f64) {
        self.curve.domain()
    }

    fn point(&self, t: f64) -> PyResult<(f64, f64)> {
        self.curve.point(t).py().map(pair)
    }

    fn curvature(&self, t: f64) -> PyResult<Option<f64>> {
        curvature_at(&self.curve, t)
    }

    fn arc_length(&self, t0: f64, t1: f64) -> PyResult<f64> {
        self.curve.arc_length(t0, t1, &ToleranceConfig::default()).py()
    }

    /// Hermite data at `points` parameters: uniform over the domain, or graded
    /// geometrically from the domain start when both increments are given.
    #[pyo3(signature = (points=16, h_first=None, h_last=None))]
    fn hermite(&self, points: usize, h_first: Option<f64>, h_last: Option<f64>) -> PyResult<PyHermiteTable> {
        let (lo, hi) = self.curve.domain();
        let params = match (h_first, h_last) {
            (Some(h_first), Some(h_last)) => {
                build_schedule(&SampleSchedule { n_points: points, t0: lo, h_first, h_last }).py()?
            }
            (None, None) => uniform_parameters((lo, hi), points),
            _ => return Err(PyValueError::new_err("h_first and h_last must be given together")),
        };
        if let Some(&t) = params.last().filter(|&&t| t > hi) {
            return Err(to_py_err(Error::ParameterOutOfRange { t, lo, hi }));
        }
        sample_hermite(&self.curve, &params, &ToleranceConfig::default()).py().map(PyHermiteTable)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.spec).map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

/// Result of fairing a polyline.
#[pyclass(name = "FairedCurve", module = "faircurve", frozen, get_all)]
pub struct PyFairedCurve {
    curve: PyNurbsCurve,
    functional: f64,
    iterations: usize,
}

/// Fairs a support (or tangent) polyline into a degree-6 v-curve.
#[pyfunction]
#[pyo3(signature = (vertices, closed=false, tangent=false, functional="variation", max_iterations=2000))]
fn vcurve(
    vertices: Vec<(f64, f64)>,
    closed: bool,
    tangent: bool,
    functional: &str,
    max_iterations: usize,
) -> PyResult<PyFairedCurve> {
    let topology = if closed { Topology::Closed } else { Topology::Open };
    let poly = if tangent {
        Polyline::tangent(points(vertices), topology)
    } else {
        Polyline::support(points(vertices), topology)
    };
    let functional = match functional {
        "variation" => Functional::Variation,
        "energy" => Functional::Energy,
        other => return Err(PyValueError::new_err(format!("unknown functional '{other}' (variation, energy)"))),
    };
    let cfg = FairingConfig { functional, max_iterations, ..FairingConfig::default() };
    let fc = fairing::vcurve(&poly, &cfg).py()?;
    Ok(PyFairedCurve { curve: PyNurbsCurve(fc.curve), functional: fc.functional, iterations: fc.iterations })
}

#[pyfunction]
fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> PyResult<f64> {
    numerics::gauss_2f1(a, b, c, z).py()
}

#[pyfunction]
#[pyo3(signature = (curves, units="unitless", scale=1.0))]
fn write_dxf(curves: Vec<PyRef<'_, PyNurbsCurve>>, units: &str, scale: f64) -> PyResult<String> {
    let curves: Vec<NurbsCurve> = curves.iter().map(|c| c.0.clone()).collect();
    io::write_dxf(&curves, self::units(units)?, scale).py()
}

/// Returns `(curves, units, warnings)`; units is None when the file does not say.
#[pyfunction]
fn read_dxf(text: &str) -> PyResult<(Vec<PyNurbsCurve>, Option<String>, Vec<String>)> {
    let import = io::read_dxf(text).py()?;
    let units = import.units.map(|u| serde_json::to_value(u).ok().and_then(|v| v.as_str().map(String::from)));
    Ok((import.curves.into_iter().map(PyNurbsCurve).collect(), units.flatten(), import.warnings))
}

/// Runs one service operation on a JSON request and returns the JSON response.
/// Operations: vcurve, analytic, approx, extract, metrics, export_dxf (returns DXF text).
#[pyfunction]
fn call(py: Python<'_>, operation: &str, request: &str) -> PyResult<String> {
    fn run<R>(text: &str, op: fn(&R) -> faircurve_core::Result<api::ApiResponse>) -> faircurve_core::Result<String>
    where
        R: serde::de::DeserializeOwned + api::HasModel,
    {
        let resp = op(&api::parse_request(text)?)?;
        serde_json::to_string(&resp).map_err(|e| Error::ModelFormat(e.to_string()))
    }
    let request = request.to_owned();
    let operation = operation.to_owned();
    py.detach(move || match operation.as_str() {
        "vcurve" => run(&request, api::vcurve),
        "analytic" => run(&request, api::analytic),
        "approx" => run(&request, api::approx),
        "extract" => run(&request, api::extract),
        "metrics" => run(&request, api::metrics),
        "export_dxf" => api::export_dxf(&api::parse_request(&request)?),
        other => Err(Error::InvalidInput(format!("unknown operation '{other}'"))),
    })
    .py()
}

#[pymodule]
fn faircurve(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", api::VERSION)?;
    m.add("FaircurveError", py.get_type::<FaircurveError>())?;
    m.add("ValidationError", py.get_type::<ValidationError>())?;
    m.add("NonConvergenceError", py.get_type::<NonConvergenceError>())?;
    m.add("StorageError", py.get_type::<StorageError>())?;
    m.add_class::<PyNurbsCurve>()?;
    m.add_class::<PyHermiteTable>()?;
    m.add_class::<PyAnalyticCurve>()?;
    m.add_class::<PyFairedCurve>()?;
    m.add_function(wrap_pyfunction!(vcurve, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_2f1, m)?)?;
    m.add_function(wrap_pyfunction!(write_dxf, m)?)?;
    m.add_function(wrap_pyfunction!(read_dxf, m)?)?;
    m.add_function(wrap_pyfunction!(call, m)?)?;
    Ok(())
}
