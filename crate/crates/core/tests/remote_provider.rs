//! The remote client against an in-process sidecar double speaking the wire
//! protocol.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use qbank::providers::{
    EmbedRequest, EmbedResponse, EmbeddingProvider, InfoResponse, RemoteConfig, RemoteProvider, TestProvider,
};
use qbank::service::http::{spawn_router, ServerHandle};
use qbank::{Error, Lang};

#[derive(Default)]
struct Sidecar {
    batches: Mutex<Vec<usize>>,
    fail_next: AtomicUsize,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
    wrong_dim: bool,
}

const DIM: usize = 8;

async fn info() -> Json<InfoResponse> {
    Json(InfoResponse { model_id: "mock-encoder".into(), dim: DIM, languages: vec![Lang::En, Lang::Ko] })
}

async fn embed(State(s): State<Arc<Sidecar>>, Json(req): Json<EmbedRequest>) -> Result<Json<EmbedResponse>, StatusCode> {
    let now = s.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    s.max_in_flight.fetch_max(now, Ordering::SeqCst);
    tokio::time::sleep(Duration::from_millis(20)).await;
    s.in_flight.fetch_sub(1, Ordering::SeqCst);
    if s.fail_next.load(Ordering::SeqCst) > 0 {
        s.fail_next.fetch_sub(1, Ordering::SeqCst);
        return Err(StatusCode::INTERNAL_SERVER_ERROR);
    }
    s.batches.lock().unwrap().push(req.texts.len());
    let dim = if s.wrong_dim { DIM + 1 } else { DIM };
    // Unnormalized on purpose: the client must normalize.
    let vectors = req.texts.iter().map(|t| TestProvider::raw_vector(t, dim).iter().map(|v| v * 3.0).collect()).collect();
    Ok(Json(EmbedResponse { model_id: "mock-encoder".into(), dim, vectors }))
}

fn start(sidecar: Sidecar) -> (ServerHandle, Arc<Sidecar>) {
    let state = Arc::new(sidecar);
    let app = Router::new().route("/info", get(info)).route("/embed", post(embed)).with_state(state.clone());
    (spawn_router(app, "127.0.0.1:0").unwrap(), state)
}

fn config(url: String) -> RemoteConfig {
    let mut c = RemoteConfig::new(url);
    c.max_batch = 3;
    c.max_in_flight = 2;
    c.retries = 2;
    c.timeout = Duration::from_secs(5);
    c
}

#[test]
fn batches_preserve_order_and_bound_concurrency() {
    let (server, state) = start(Sidecar::default());
    let p = RemoteProvider::connect(config(server.url())).unwrap();
    assert_eq!(p.descriptor().provider_id, "remote:mock-encoder");
    assert_eq!(p.descriptor().dim, DIM);
    let texts: Vec<String> = (0..10).map(|i| format!("question number {i}")).collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let out = p.embed(&refs, Lang::Ko).unwrap();
    assert_eq!(out.len(), 10);
    let local = TestProvider::new(DIM).unwrap();
    for (t, e) in refs.iter().zip(&out) {
        let want = local.embed_one(t, Lang::En).unwrap();
        for (a, b) in e.values.iter().zip(&want.values) {
            assert!((a - b).abs() < 1e-6);
        }
    }
    let mut batches = state.batches.lock().unwrap().clone();
    batches.sort();
    assert_eq!(batches, [1, 3, 3, 3]);
    assert!(state.max_in_flight.load(Ordering::SeqCst) <= 2);
}

#[test]
fn retries_are_idempotent() {
    let (server, state) = start(Sidecar::default());
    let p = RemoteProvider::connect(config(server.url())).unwrap();
    let first = p.embed(&["Do you snore?"], Lang::En).unwrap();
    state.fail_next.store(2, Ordering::SeqCst);
    let second = p.embed(&["Do you snore?"], Lang::En).unwrap();
    assert_eq!(first, second);
    state.fail_next.store(5, Ordering::SeqCst);
    assert!(matches!(p.embed(&["Do you snore?"], Lang::En), Err(Error::ProviderUnreachable(_))));
}

#[test]
fn wrong_dimension_is_rejected() {
    let (server, _) = start(Sidecar { wrong_dim: true, ..Default::default() });
    let p = RemoteProvider::connect(config(server.url())).unwrap();
    assert!(matches!(p.embed(&["a"], Lang::En), Err(Error::DimMismatch { .. })));
}

#[test]
fn unreachable_endpoint() {
    let mut c = config("http://127.0.0.1:9".into());
    c.timeout = Duration::from_millis(500);
    assert!(matches!(RemoteProvider::connect(c), Err(Error::ProviderUnreachable(_))));
}
