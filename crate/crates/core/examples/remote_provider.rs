//! The remote encoder client against a local stand-in that speaks the same
//! wire protocol.

use axum::routing::{get, post};
use axum::{Json, Router};
use qbank::providers::{EmbedRequest, EmbedResponse, EmbeddingProvider, InfoResponse, RemoteConfig, RemoteProvider, TestProvider};
use qbank::service::http::spawn_router;
use qbank::simeng::cosine;
use qbank::Lang;

const DIM: usize = 12;

async fn info() -> Json<InfoResponse> {
    Json(InfoResponse { model_id: "stand-in".into(), dim: DIM, languages: vec![Lang::En, Lang::Ko] })
}

async fn embed(Json(req): Json<EmbedRequest>) -> Json<EmbedResponse> {
    println!("  sidecar got a batch of {} ({})", req.texts.len(), req.lang.code());
    let vectors = req.texts.iter().map(|t| TestProvider::raw_vector(t, DIM)).collect();
    Json(EmbedResponse { model_id: "stand-in".into(), dim: DIM, vectors })
}

fn main() -> qbank::Result<()> {
    let app = Router::new().route("/info", get(info)).route("/embed", post(embed));
    let server = spawn_router(app, "127.0.0.1:0")?;

    let mut config = RemoteConfig::new(server.url());
    config.max_batch = 2;
    let remote = RemoteProvider::connect(config)?;
    println!("connected: {} dim {}", remote.descriptor().provider_id, remote.descriptor().dim);

    let texts = ["Do you snore?", "Do you snore loudly?", "How often do you run?", "Do you eat breakfast?", "Do you nap?"];
    let vectors = remote.embed(&texts, Lang::En)?;
    for (t, v) in texts.iter().zip(&vectors).skip(1) {
        println!("{:.3}  {t}", cosine(&vectors[0], v)?.get());
    }
    Ok(())
}
