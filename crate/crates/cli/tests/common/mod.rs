#![allow(dead_code)]

use std::f64::consts::PI;

use axum::body::{Body, Bytes};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use faircurve_core::analytic::{AnalyticCurveSpec, SampleSchedule, SuperspiralParams};
use faircurve_core::api::{AnalyticRequest, ApproxRequest, ExportRequest, MetricsRequest, VcurveRequest};
use faircurve_core::fairing::{FairingConfig, Polyline};
use faircurve_core::io::{EntityValue, ModelDocument, Units};
use faircurve_core::nurbs::{NurbsCurve, Topology};
use faircurve_core::Vec2;
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tower::ServiceExt;

pub fn octagon(r: f64) -> Polyline {
    let v = (0..8).map(|i| Vec2::from_angle(i as f64 * PI / 4.0) * r).collect();
    Polyline::support(v, Topology::Closed)
}

pub fn unit_circle() -> NurbsCurve {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let unit = [
        (1.0, 0.0),
        (1.0, 1.0),
        (0.0, 1.0),
        (-1.0, 1.0),
        (-1.0, 0.0),
        (-1.0, -1.0),
        (0.0, -1.0),
        (1.0, -1.0),
        (1.0, 0.0),
    ];
    let pts = unit.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
    let w = vec![1.0, h, 1.0, h, 1.0, h, 1.0, h, 1.0];
    let knots = vec![0.0, 0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0, 4.0];
    NurbsCurve::new(2, knots, pts, w).unwrap()
}

pub fn model_with(id: &str, value: EntityValue) -> ModelDocument {
    let mut m = ModelDocument::new(Units::Mm);
    m.push(id, value).unwrap();
    m
}

pub fn vcurve_body(poly: Polyline) -> String {
    let req = VcurveRequest {
        model: model_with("p", EntityValue::Polyline(poly)),
        id: "p".into(),
        out: None,
        config: FairingConfig::default(),
        hermite_points: None,
        profile_samples: 128,
    };
    serde_json::to_string(&req).unwrap()
}

pub fn analytic_request(params: SuperspiralParams) -> AnalyticRequest {
    AnalyticRequest {
        spec: AnalyticCurveSpec::Superspiral { params, range: [0.0, 6.5] },
        schedule: Some(SampleSchedule { n_points: 16, t0: 0.0, h_first: 0.1, h_last: 1.0 }),
        points: 16,
        id: "s".into(),
        samples: 64,
        units: Units::Mm,
    }
}

pub fn analytic_body(params: SuperspiralParams) -> String {
    serde_json::to_string(&analytic_request(params)).unwrap()
}

pub fn approx_body(params: SuperspiralParams, degree: usize) -> String {
    let model = faircurve_core::api::analytic(&analytic_request(params)).unwrap().model;
    let req = ApproxRequest {
        model,
        id: "s.hermite".into(),
        degree,
        clip_start: 0,
        clip_end: 3,
        reference: Some("s".into()),
        out: None,
        profile_samples: 64,
    };
    serde_json::to_string(&req).unwrap()
}

pub fn metrics_body(scale: f64) -> String {
    let req = MetricsRequest {
        model: model_with("c", EntityValue::NurbsCurve(unit_circle().scaled(scale))),
        id: "c".into(),
        reference: None,
        out: None,
        profile_samples: 64,
    };
    serde_json::to_string(&req).unwrap()
}

pub fn export_body(scale: f64) -> String {
    let req = ExportRequest { model: model_with("c", EntityValue::NurbsCurve(unit_circle())), ids: None, scale };
    serde_json::to_string(&req).unwrap()
}

/// `n` distinct requests across every POST endpoint.
pub fn mixed_requests(n: usize, seed: u64) -> Vec<(&'static str, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let x = rng.random_range(0.5..2.0);
            match i % 5 {
                0 => {
                    let mut p = octagon(x);
                    p.vertices[3] = p.vertices[3] * rng.random_range(0.9..1.1);
                    ("/api/vcurve", vcurve_body(p))
                }
                1 => {
                    let p = SuperspiralParams::new(
                        rng.random_range(0.1..2.0),
                        rng.random_range(0.1..2.0),
                        rng.random_range(2.0..3.0),
                    );
                    ("/api/analytic", analytic_body(p))
                }
                2 => {
                    let p = SuperspiralParams::new(0.5, 1.0, rng.random_range(1.0..2.0));
                    ("/api/approx", approx_body(p, [3, 6, 8, 10][rng.random_range(0..4)]))
                }
                3 => ("/api/metrics", metrics_body(x)),
                _ => ("/api/export/dxf", export_body(x)),
            }
        })
        .collect()
}

pub async fn call(router: Router, method: Method, path: &str, body: String) -> (StatusCode, Bytes) {
    let req = Request::builder().method(method).uri(path).body(Body::from(body)).unwrap();
    let resp = router.oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, bytes)
}

pub async fn post(router: Router, path: &str, body: String) -> (StatusCode, Bytes) {
    call(router, Method::POST, path, body).await
}

/// Response body with `diagnostics.timings_ms` removed; other bodies verbatim.
pub fn strip_timings(bytes: &[u8]) -> String {
    match serde_json::from_slice::<serde_json::Value>(bytes) {
        Ok(mut v) => {
            if let Some(d) = v.get_mut("diagnostics").and_then(|d| d.as_object_mut()) {
                d.remove("timings_ms");
            }
            serde_json::to_string(&v).unwrap()
        }
        Err(_) => String::from_utf8_lossy(bytes).into_owned(),
    }
}

pub fn error_code(bytes: &[u8]) -> String {
    let v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
    v["error"]["code"].as_str().unwrap_or_default().to_string()
}
