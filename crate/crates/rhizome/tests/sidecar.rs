use std::future::IntoFuture;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use axum::extract::State;
use axum::routing::{get, post};
use axum::{Json, Router};
use rhizome::pipeline::{run_inline, EventKind, RunConfig, Services};
use rhizome::topography::{compute_topography, EmbeddingConfig, EmbeddingError, SidecarClient, TopographyOutcome};
use rhizome_core::topography::echo::echo_embedding;
use rhizome_core::{normalize_record, PaperRecord, SourceKind, SourceRecord, TopographyParams};
use serde_json::{json, Value};

const DIM: usize = 16;

/// Which endpoint answers with one entry too few.
#[derive(Clone, Copy, PartialEq)]
enum Short {
    None,
    Embed,
    Reduce,
    Cluster,
}

#[derive(Clone)]
struct Stub {
    short: Short,
    embed_calls: Arc<AtomicUsize>,
}

fn trim<T>(mut v: Vec<T>, stub: &Stub, at: Short) -> Vec<T> {
    if stub.short == at {
        v.pop();
    }
    v
}

async fn embed(State(stub): State<Stub>, Json(body): Json<Value>) -> Json<Value> {
    stub.embed_calls.fetch_add(1, Ordering::SeqCst);
    let vectors: Vec<Vec<f64>> =
        body["texts"].as_array().unwrap().iter().map(|t| echo_embedding(t.as_str().unwrap(), DIM)).collect();
    let model = body["model"].as_str().unwrap_or("stub-default").to_string();
    Json(json!({ "vectors": trim(vectors, &stub, Short::Embed), "model": model, "dim": DIM }))
}

async fn reduce(State(stub): State<Stub>, Json(body): Json<Value>) -> Json<Value> {
    assert_eq!(body["target_dim"], 2);
    let points: Vec<[f64; 2]> =
        body["vectors"].as_array().unwrap().iter().map(|v| [v[0].as_f64().unwrap(), v[1].as_f64().unwrap()]).collect();
    Json(json!({ "points": trim(points, &stub, Short::Reduce) }))
}

async fn cluster(State(stub): State<Stub>, Json(body): Json<Value>) -> Json<Value> {
    let labels: Vec<i64> =
        body["points"].as_array().unwrap().iter().map(|p| i64::from(p[0].as_f64().unwrap() >= 0.0)).collect();
    Json(json!({ "labels": trim(labels, &stub, Short::Cluster) }))
}

async fn health() -> Json<Value> {
    Json(json!({ "model_loaded": true, "model": "stub-default", "device": "cpu" }))
}

async fn start_stub(short: Short) -> (String, Arc<AtomicUsize>) {
    let calls = Arc::new(AtomicUsize::new(0));
    let app = Router::new()
        .route("/embed", post(embed))
        .route("/reduce", post(reduce))
        .route("/cluster", post(cluster))
        .route("/health", get(health))
        .with_state(Stub { short, embed_calls: calls.clone() });
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    tokio::spawn(axum::serve(listener, app).into_future());
    (url, calls)
}

/// An address nothing listens on.
async fn dead_url() -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    format!("http://{}", listener.local_addr().unwrap())
}

fn corpus(n: usize) -> Vec<PaperRecord> {
    (0..n)
        .map(|i| {
            let raw = SourceRecord {
                native_id: format!("openalex:W{i}"),
                title: Some(format!("paper {i}")),
                abstract_text: Some(format!("energy flows {} data centres term{}", i % 3, i)),
                ..Default::default()
            };
            normalize_record(raw, SourceKind::OpenAlex).unwrap()
        })
        .collect()
}

fn sidecar(url: &str) -> EmbeddingConfig {
    EmbeddingConfig::Sidecar { url: url.to_string(), model: Some("stub-model".into()) }
}

#[tokio::test]
async fn health_is_parsed() {
    let (url, _) = start_stub(Short::None).await;
    let health = SidecarClient::new(&url, None).health().await.unwrap();
    assert!(health.model_loaded);
    assert_eq!(health.details["device"], "cpu");
}

#[tokio::test]
async fn sidecar_backed_topography() {
    let (url, calls) = start_stub(Short::None).await;
    let papers = corpus(12);
    let outcome = compute_topography(&papers, &sidecar(&url), &TopographyParams::default(), 7).await.unwrap();
    let TopographyOutcome::Ready { model_name, backend, map, .. } = outcome else { panic!("not ready: {outcome:?}") };
    assert_eq!(backend, "sidecar");
    assert_eq!(model_name, "stub-model");
    assert_eq!(calls.load(Ordering::SeqCst), 1);
    assert_eq!(map.paper_ids.len(), 12);
    let mut stub_labels = Vec::new();
    for (i, p) in papers.iter().enumerate() {
        let v = echo_embedding(&p.text(), DIM);
        assert_eq!(map.points[i], [v[0], v[1]]);
        stub_labels.push(v[0] >= 0.0);
    }
    // labels are renumbered, so compare the partition
    for i in 0..12 {
        for j in 0..12 {
            let same = map.cluster_labels[i] >= 0 && map.cluster_labels[i] == map.cluster_labels[j];
            assert_eq!(same, map.cluster_labels[i] >= 0 && stub_labels[i] == stub_labels[j], "{i} {j}");
        }
    }
    assert!(!map.clusters.is_empty());
    assert_eq!(map.marginalization.len(), 12);
}

#[tokio::test]
async fn small_corpora_skip_reduce_and_cluster() {
    // a stub that would fail both calls
    let (url, calls) = start_stub(Short::Reduce).await;
    let outcome = compute_topography(&corpus(3), &sidecar(&url), &TopographyParams::default(), 7).await.unwrap();
    assert!(matches!(outcome, TopographyOutcome::Ready { .. }));
    assert_eq!(calls.load(Ordering::SeqCst), 1);
}

#[tokio::test]
async fn cardinality_mismatches_are_errors() {
    for (short, what) in [(Short::Embed, "vectors"), (Short::Reduce, "points"), (Short::Cluster, "labels")] {
        let (url, _) = start_stub(short).await;
        let err = compute_topography(&corpus(10), &sidecar(&url), &TopographyParams::default(), 1).await.unwrap_err();
        match err {
            EmbeddingError::Cardinality { what: w, expected, got } => {
                assert_eq!((w, expected, got), (what, 10, 9));
            }
            other => panic!("{what}: unexpected {other:?}"),
        }
    }
}

#[tokio::test]
async fn unreachable_sidecar_is_an_http_error() {
    let url = dead_url().await;
    let err = compute_topography(&corpus(10), &sidecar(&url), &TopographyParams::default(), 1).await.unwrap_err();
    assert!(matches!(err, EmbeddingError::Http(_)), "{err:?}");
    assert!(SidecarClient::new(&url, None).health().await.is_err());
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("energy-information-nexus")
}

async fn fixture_run_with(embeddings: EmbeddingConfig) -> (TopographyOutcome, Value) {
    let mut config = RunConfig::fixture("energy-information nexus", fixture_dir());
    config.embeddings = embeddings;
    let services = Services::from_config(&config).unwrap();
    let (handle, ok) = run_inline(config, services).await;
    assert!(ok, "{:?}", handle.snapshot().error);
    let ready = handle.events.snapshot().into_iter().find(|e| e.kind == EventKind::TopographyReady).unwrap();
    (handle.cartography().unwrap().topography.clone(), ready.payload)
}

#[tokio::test]
async fn run_uses_the_sidecar() {
    let (url, _) = start_stub(Short::None).await;
    let (topography, payload) = fixture_run_with(sidecar(&url)).await;
    let TopographyOutcome::Ready { backend, model_name, map, .. } = topography else { panic!() };
    assert_eq!((backend.as_str(), model_name.as_str()), ("sidecar", "stub-model"));
    assert_eq!(map.paper_ids.len(), 49);
    assert_eq!(payload["status"], "ready");
}

#[tokio::test]
async fn run_completes_when_the_sidecar_is_down() {
    let (topography, payload) = fixture_run_with(sidecar(&dead_url().await)).await;
    assert!(matches!(topography, TopographyOutcome::Unavailable { .. }), "{topography:?}");
    assert_eq!(payload["status"], "unavailable");
    assert!(payload["reason"].as_str().unwrap().contains("embedding service"));
}
