use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::{json, Value};

use crate::queue::{LikertOption, ReviewRequest, Submission};
use crate::{AnnotationService, ServiceError};

pub const SCHEMA_VERSION: u32 = 1;

pub type Shared = Arc<Mutex<AnnotationService>>;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::Unauthorized => StatusCode::UNAUTHORIZED,
            ServiceError::Forbidden(_) => StatusCode::FORBIDDEN,
            ServiceError::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Conflict(_) | ServiceError::BatchOpen(_) => StatusCode::CONFLICT,
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Replay { .. } | ServiceError::Io { .. } => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            log::error!("{self}");
        }
        let body = json!({
            "schema_version": SCHEMA_VERSION,
            "error": { "code": self.code(), "message": self.to_string() },
        });
        (status, Json(body)).into_response()
    }
}

fn versioned<T: Serialize>(payload: T) -> Json<Value> {
    let mut value = serde_json::to_value(payload).expect("payload serializes");
    if let Value::Object(map) = &mut value {
        map.insert("schema_version".into(), SCHEMA_VERSION.into());
    }
    Json(value)
}

fn lock(service: &Shared) -> MutexGuard<'_, AnnotationService> {
    service
        .lock()
        .unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn bearer(headers: &HeaderMap) -> Option<String> {
    headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(|t| t.trim().to_string())
}

fn token_from(query: &HashMap<String, String>, headers: &HeaderMap) -> Option<String> {
    query.get("token").cloned().or_else(|| bearer(headers))
}

async fn register(State(service): State<Shared>) -> Result<Json<Value>, ServiceError> {
    let reg = lock(&service).register()?;
    Ok(versioned(reg))
}

async fn next(
    State(service): State<Shared>,
    Query(query): Query<HashMap<String, String>>,
    headers: HeaderMap,
) -> Result<Json<Value>, ServiceError> {
    let token = token_from(&query, &headers).ok_or(ServiceError::Unauthorized)?;
    let instance = lock(&service).next_instance(&token)?;
    Ok(versioned(json!({
        "complete": instance.is_none(),
        "instance": instance,
        "likert_options": LikertOption::all(),
    })))
}

async fn submit(
    State(service): State<Shared>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<Value>, ServiceError> {
    let mut value: Value = serde_json::from_slice(&body)
        .map_err(|e| ServiceError::Validation(format!("invalid JSON body: {e}")))?;
    if let (Value::Object(map), Some(token)) = (&mut value, bearer(&headers)) {
        map.entry("token").or_insert(Value::String(token));
    }
    let submission: Submission = serde_json::from_value(value)
        .map_err(|e| ServiceError::Validation(format!("invalid submission: {e}")))?;
    let ack = lock(&service).submit(&submission)?;
    Ok(versioned(ack))
}

async fn progress(
    State(service): State<Shared>,
    Query(query): Query<HashMap<String, String>>,
    headers: HeaderMap,
) -> Result<Json<Value>, ServiceError> {
    let token = token_from(&query, &headers);
    let progress = lock(&service).progress(token.as_deref())?;
    Ok(versioned(progress))
}

async fn review(
    State(service): State<Shared>,
    Path(batch): Path<String>,
    body: Bytes,
) -> Result<Json<Value>, ServiceError> {
    let batch: u32 = batch
        .parse()
        .map_err(|_| ServiceError::Validation(format!("batch `{batch}` is not a number")))?;
    let request: ReviewRequest = if body.iter().all(u8::is_ascii_whitespace) {
        ReviewRequest::default()
    } else {
        serde_json::from_slice(&body)
            .map_err(|e| ServiceError::Validation(format!("invalid review request: {e}")))?
    };
    let report = lock(&service).review_batch(batch, &request)?;
    Ok(versioned(report))
}

async fn export(State(service): State<Shared>) -> Response {
    let records = lock(&service).export();
    let mut body = String::new();
    for r in &records {
        body.push_str(&serde_json::to_string(r).expect("record serializes"));
        body.push('\n');
    }
    let mut response = body.into_response();
    let headers = response.headers_mut();
    headers.insert(
        header::CONTENT_TYPE,
        HeaderValue::from_static("application/x-ndjson"),
    );
    headers.insert("x-schema-version", HeaderValue::from(SCHEMA_VERSION));
    response
}

async fn fallback() -> ServiceError {
    ServiceError::NotFound("route".into())
}

pub fn router(service: Shared) -> Router {
    Router::new()
        .route("/api/register", post(register))
        .route("/api/next", get(next))
        .route("/api/submit", post(submit))
        .route("/api/progress", get(progress))
        .route("/api/review/{batch}", post(review))
        .route("/api/export", get(export))
        .fallback(fallback)
        .with_state(service)
}

/// Serves on `addr` until interrupted, using at most `threads` workers.
pub fn run_blocking(
    addr: SocketAddr,
    service: AnnotationService,
    threads: usize,
) -> std::io::Result<()> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(threads.max(1))
        .enable_all()
        .build()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        log::info!("listening on {}", listener.local_addr()?);
        let app = router(Arc::new(Mutex::new(service)));
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })
}
