//! Stateless HTTP facade. Every handler parses its body, runs one kernel operation on
//! the blocking pool and serializes the result; nothing is kept between requests.

use std::net::SocketAddr;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::DefaultBodyLimit;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use faircurve_core::api::{self, ApiResponse, ErrorBody, HasModel};
use faircurve_core::io::{DEFAULT_DXF_NAME, MEDIA_TYPE};
use faircurve_core::{Error, ErrorClass};
use serde::de::DeserializeOwned;

/// Largest accepted request body.
pub const MAX_BODY_BYTES: usize = 10 * 1024 * 1024;

pub const DXF_MEDIA_TYPE: &str = "application/dxf";

pub fn router() -> Router {
    router_with_limit(MAX_BODY_BYTES)
}

pub fn router_with_limit(max_body: usize) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/vcurve", post(|b: Result<Bytes, BytesRejection>| operation(b, api::vcurve)))
        .route("/api/analytic", post(|b: Result<Bytes, BytesRejection>| operation(b, api::analytic)))
        .route("/api/approx", post(|b: Result<Bytes, BytesRejection>| operation(b, api::approx)))
        .route("/api/extract", post(|b: Result<Bytes, BytesRejection>| operation(b, api::extract)))
        .route("/api/metrics", post(|b: Result<Bytes, BytesRejection>| operation(b, api::metrics)))
        .route("/api/export/dxf", post(export_dxf))
        .layer(DefaultBodyLimit::max(max_body))
}

pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router())
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn error_response(status: StatusCode, body: ErrorBody) -> Response {
    let json = serde_json::to_string(&serde_json::json!({ "error": body })).unwrap_or_default();
    (status, [(header::CONTENT_TYPE, "application/json")], json).into_response()
}

fn kernel_error(e: &Error) -> Response {
    let status = match (e, e.class()) {
        (Error::ModelFormat(_), _) => StatusCode::BAD_REQUEST,
        (_, ErrorClass::Io) => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    };
    error_response(status, ErrorBody::from(e))
}

fn rejection(r: BytesRejection) -> Response {
    let status = r.status();
    let code = if status == StatusCode::PAYLOAD_TOO_LARGE { "PAYLOAD_TOO_LARGE" } else { "BAD_REQUEST" };
    error_response(status, ErrorBody { code: code.into(), message: r.body_text() })
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, Error> + Send + 'static) -> Result<T, Response> {
    match tokio::task::spawn_blocking(f).await {
        Ok(Ok(v)) => Ok(v),
        Ok(Err(e)) => Err(kernel_error(&e)),
        Err(_) => Err(error_response(
            StatusCode::INTERNAL_SERVER_ERROR,
            ErrorBody { code: "INTERNAL".into(), message: "request handler panicked".into() },
        )),
    }
}

#[allow(clippy::result_large_err)]
fn body_text(body: Result<Bytes, BytesRejection>) -> Result<String, Response> {
    let bytes = body.map_err(rejection)?;
    String::from_utf8(bytes.to_vec()).map_err(|_| {
        error_response(
            StatusCode::BAD_REQUEST,
            ErrorBody { code: "BAD_REQUEST".into(), message: "body is not UTF-8".into() },
        )
    })
}

async fn operation<R>(
    body: Result<Bytes, BytesRejection>,
    op: fn(&R) -> faircurve_core::Result<ApiResponse>,
) -> Response
where
    R: DeserializeOwned + HasModel + Send + 'static,
{
    let text = match body_text(body) {
        Ok(t) => t,
        Err(r) => return r,
    };
    let result = blocking(move || {
        let req: R = api::parse_request(&text)?;
        let resp = op(&req)?;
        serde_json::to_string(&resp).map_err(|e| Error::ModelFormat(e.to_string()))
    })
    .await;
    match result {
        Ok(json) => ([(header::CONTENT_TYPE, MEDIA_TYPE)], json).into_response(),
        Err(r) => r,
    }
}

async fn export_dxf(body: Result<Bytes, BytesRejection>) -> Response {
    let text = match body_text(body) {
        Ok(t) => t,
        Err(r) => return r,
    };
    let result = blocking(move || api::export_dxf(&api::parse_request(&text)?)).await;
    match result {
        Ok(dxf) => {
            let disposition = format!("attachment; filename=\"{DEFAULT_DXF_NAME}\"");
            ([(header::CONTENT_TYPE, DXF_MEDIA_TYPE.to_string()), (header::CONTENT_DISPOSITION, disposition)], dxf)
                .into_response()
        }
        Err(r) => r,
    }
}

async fn health() -> Response {
    let json = serde_json::to_string(&api::health()).unwrap_or_default();
    ([(header::CONTENT_TYPE, "application/json")], json).into_response()
}
