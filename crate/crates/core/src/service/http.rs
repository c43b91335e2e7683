//! JSON over HTTP.
//!
//! | method | path            | body                          | response |
//! |--------|-----------------|-------------------------------|----------|
//! | POST   | `/v1/questions` | `{text, lang, domain}`        | `{id, version, dim, created}` |
//! | POST   | `/v1/similar`   | `{text, lang, k}`             | `{matches, degenerate, bank_version}` |
//! | GET    | `/v1/profile`   |                               | threshold profile |
//! | PUT    | `/v1/profile`   | threshold profile             | threshold profile |
//! | GET    | `/v1/health`    |                               | `{bank_size, dim, provider_id, bank_version}` |
//!
//! Both POST bodies also accept an optional `provider`, which must name the
//! bank's provider.  Errors are `{"error": CODE, "message": text}`.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use super::{BankStore, Health, Registered, SimilarResponse};
use crate::error::{Error, Result};
use crate::metrics::ThresholdProfile;
use crate::model::{Domain, Lang, Question};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegisterRequest {
    pub text: String,
    pub lang: Lang,
    pub domain: Domain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimilarRequest {
    pub text: String,
    pub lang: Lang,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

#[derive(Clone)]
struct AppState {
    store: Arc<BankStore>,
    default_k: usize,
}

enum ApiError {
    Domain(Error),
    BadRequest(String),
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::Domain(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::BadRequest(r.body_text())
    }
}

fn status_for(e: &Error) -> StatusCode {
    let inner = match e {
        Error::AtPair { source, .. } => source.as_ref(),
        other => other,
    };
    match inner {
        Error::BadK(_)
        | Error::EmptyText
        | Error::InvalidCutoff(_)
        | Error::UnsupportedLanguage { .. }
        | Error::NotInStore(_)
        | Error::NoTranslation(_) => StatusCode::BAD_REQUEST,
        Error::DuplicateId { .. } | Error::ProviderMismatch { .. } => StatusCode::CONFLICT,
        Error::ProviderUnreachable(_) | Error::TranslatorUnreachable(_) | Error::DimMismatch { .. } => StatusCode::BAD_GATEWAY,
        Error::Poisoned => StatusCode::SERVICE_UNAVAILABLE,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::Domain(e) => (status_for(&e), ErrorBody { error: e.code().into(), message: e.to_string() }),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, ErrorBody { error: "BAD_REQUEST".into(), message: m }),
        };
        (status, Json(body)).into_response()
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T> + Send + 'static) -> std::result::Result<T, ApiError> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError::from),
        Err(e) => Err(ApiError::BadRequest(format!("worker failed: {e}"))),
    }
}

async fn register(
    State(s): State<AppState>,
    body: std::result::Result<Json<RegisterRequest>, JsonRejection>,
) -> std::result::Result<Json<Registered>, ApiError> {
    let Json(req) = body?;
    s.store.check_provider(req.provider.as_deref())?;
    let q = Question::new(req.id, req.text, req.lang, req.domain)?;
    let store = s.store.clone();
    Ok(Json(blocking(move || store.register_question(q)).await?))
}

async fn similar(
    State(s): State<AppState>,
    body: std::result::Result<Json<SimilarRequest>, JsonRejection>,
) -> std::result::Result<Json<SimilarResponse>, ApiError> {
    let Json(req) = body?;
    s.store.check_provider(req.provider.as_deref())?;
    let k = req.k.unwrap_or(s.default_k as i64);
    let store = s.store.clone();
    Ok(Json(blocking(move || store.query_similar(&req.text, req.lang, k)).await?))
}

async fn get_profile(State(s): State<AppState>) -> Json<ThresholdProfile> {
    Json(s.store.profile())
}

async fn put_profile(
    State(s): State<AppState>,
    body: std::result::Result<Json<ThresholdProfile>, JsonRejection>,
) -> std::result::Result<Json<ThresholdProfile>, ApiError> {
    let Json(p) = body?;
    let store = s.store.clone();
    blocking(move || store.set_profile(p)).await?;
    Ok(Json(s.store.profile()))
}

async fn health(State(s): State<AppState>) -> Json<Health> {
    Json(s.store.health())
}

pub fn router(store: Arc<BankStore>, default_k: usize) -> Router {
    Router::new()
        .route("/v1/questions", post(register))
        .route("/v1/similar", post(similar))
        .route("/v1/profile", get(get_profile).put(put_profile))
        .route("/v1/health", get(health))
        .with_state(AppState { store, default_k })
}

/// Serves until Ctrl-C.
pub async fn serve(store: Arc<BankStore>, addr: &str, default_k: usize) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| Error::io(addr, e))?;
    let local = listener.local_addr().map_err(|e| Error::io(addr, e))?;
    eprintln!("listening on http://{local}");
    axum::serve(listener, router(store, default_k))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::io(addr, e))
}

/// A server on a background thread, stopped when dropped.
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Starts [`router`] on `addr` (use port 0 for an ephemeral port).
pub fn spawn(store: Arc<BankStore>, addr: &str, default_k: usize) -> Result<ServerHandle> {
    let app = router(store, default_k);
    spawn_router(app, addr)
}

/// Runs any router on a background thread.  Also handy for test doubles.
pub fn spawn_router(app: Router, addr: &str) -> Result<ServerHandle> {
    let std_listener = std::net::TcpListener::bind(addr).map_err(|e| Error::io(addr, e))?;
    std_listener.set_nonblocking(true).map_err(|e| Error::io(addr, e))?;
    let local = std_listener.local_addr().map_err(|e| Error::io(addr, e))?;
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .map_err(|e| Error::io(addr, e))?;
    let thread = std::thread::spawn(move || {
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(std_listener).expect("listener registers with runtime");
            let _ = axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await;
        });
    });
    Ok(ServerHandle { addr: local, shutdown: Some(tx), thread: Some(thread) })
}
