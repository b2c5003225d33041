//! REST and SSE surface over the run registry.

use std::convert::Infallible;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{Stream, StreamExt};
use serde::Deserialize;
use serde_json::json;

use crate::pipeline::{FieldError, RunConfig, RunHandle, RunRegistry, StreamError};

pub fn router(registry: Arc<RunRegistry>) -> Router {
    Router::new()
        .route("/runs", post(create_run).get(list_runs))
        .route("/runs/{id}", get(run_status))
        .route("/runs/{id}/events", get(run_events))
        .route("/runs/{id}/cartography", get(run_cartography))
        .route("/runs/{id}/graph", get(run_graph))
        .route("/runs/{id}/topography", get(run_topography))
        .with_state(registry)
}

pub async fn serve(addr: SocketAddr, registry: Arc<RunRegistry>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(registry)).await
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn not_found(id: &str) -> Response {
    error(StatusCode::NOT_FOUND, format!("no run {id}"))
}

fn lookup(registry: &RunRegistry, id: &str) -> Result<Arc<RunHandle>, Response> {
    registry.get(id).ok_or_else(|| not_found(id))
}

async fn create_run(State(registry): State<Arc<RunRegistry>>, body: Bytes) -> Response {
    let config: RunConfig = match serde_json::from_slice(&body) {
        Ok(c) => c,
        Err(e) => {
            let errors = [FieldError { field: "body".into(), reason: e.to_string() }];
            return (StatusCode::BAD_REQUEST, Json(json!({ "errors": errors }))).into_response();
        }
    };
    match registry.start_run(config) {
        Ok(handle) => (StatusCode::CREATED, Json(json!({ "run_id": handle.run_id }))).into_response(),
        Err(errors) => (StatusCode::BAD_REQUEST, Json(json!({ "errors": errors }))).into_response(),
    }
}

async fn list_runs(State(registry): State<Arc<RunRegistry>>) -> Response {
    Json(registry.list()).into_response()
}

async fn run_status(State(registry): State<Arc<RunRegistry>>, Path(id): Path<String>) -> Response {
    match lookup(&registry, &id) {
        Ok(h) => Json(h.snapshot()).into_response(),
        Err(r) => r,
    }
}

#[derive(Debug, Deserialize)]
struct EventsQuery {
    from: Option<u64>,
}

/// `Last-Event-ID: n` resumes after event n; `?from=n` starts at n.
fn start_sequence(headers: &HeaderMap, query: &EventsQuery) -> u64 {
    let last = headers.get("last-event-id").and_then(|v| v.to_str().ok()).and_then(|v| v.trim().parse::<u64>().ok());
    match last {
        Some(n) => n + 1,
        None => query.from.unwrap_or(0),
    }
}

fn sse_stream(handle: &RunHandle, from: u64) -> impl Stream<Item = Result<Event, Infallible>> {
    handle.events.subscribe(from).map(|item| {
        Ok(match item {
            Ok(e) => Event::default()
                .id(e.sequence.to_string())
                .event(e.kind.as_str())
                .data(serde_json::to_string(&e).expect("event serializes")),
            Err(StreamError::Dropped { missed }) => Event::default()
                .event("subscriber_dropped")
                .data(json!({ "error": "subscriber fell behind", "missed": missed }).to_string()),
        })
    })
}

async fn run_events(
    State(registry): State<Arc<RunRegistry>>,
    Path(id): Path<String>,
    Query(query): Query<EventsQuery>,
    headers: HeaderMap,
) -> Response {
    match lookup(&registry, &id) {
        Ok(h) => {
            Sse::new(sse_stream(&h, start_sequence(&headers, &query))).keep_alive(KeepAlive::default()).into_response()
        }
        Err(r) => r,
    }
}

async fn run_cartography(State(registry): State<Arc<RunRegistry>>, Path(id): Path<String>) -> Response {
    match lookup(&registry, &id) {
        Ok(h) => match h.cartography() {
            Some(c) => Json(c.as_ref().clone()).into_response(),
            None => error(StatusCode::CONFLICT, "cartography not ready"),
        },
        Err(r) => r,
    }
}

async fn run_graph(State(registry): State<Arc<RunRegistry>>, Path(id): Path<String>) -> Response {
    match lookup(&registry, &id) {
        Ok(h) => match h.cartography() {
            Some(c) => Json(&c.graph).into_response(),
            None => error(StatusCode::CONFLICT, "graph not ready"),
        },
        Err(r) => r,
    }
}

async fn run_topography(State(registry): State<Arc<RunRegistry>>, Path(id): Path<String>) -> Response {
    match lookup(&registry, &id) {
        Ok(h) => match h.topography() {
            Some(t) => Json(t).into_response(),
            None => error(StatusCode::CONFLICT, "topography not ready"),
        },
        Err(r) => r,
    }
}
