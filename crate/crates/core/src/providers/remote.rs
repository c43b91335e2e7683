//! HTTP client for an external sentence encoder.
//!
//! Wire protocol (JSON bodies):
//!
//! * `POST /embed` with `{"texts": [...], "lang": "en"|"ko"}` returns
//!   `{"model_id": str, "dim": int, "vectors": [[float, ...], ...]}`
//! * `GET /info` returns `{"model_id": str, "dim": int, "languages": [...]}`

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Embedding, EmbeddingProvider, ProviderDescriptor, ProviderKind};
use crate::error::{Error, Result};
use crate::model::Lang;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedRequest {
    pub texts: Vec<String>,
    pub lang: Lang,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub model_id: String,
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoResponse {
    pub model_id: String,
    pub dim: usize,
    pub languages: Vec<Lang>,
}

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub max_batch: usize,
    pub max_in_flight: usize,
    pub retries: usize,
    pub timeout: Duration,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteConfig {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            max_batch: 64,
            max_in_flight: 4,
            retries: 2,
            timeout: Duration::from_secs(30),
        }
    }
}

/// Batches texts into `max_batch`-sized requests, at most `max_in_flight` at a
/// time, and reassembles the results in input order.  Requests are pure
/// functions of their body, so transport failures are retried.
#[derive(Debug, Clone)]
pub struct RemoteProvider {
    config: RemoteConfig,
    agent: ureq::Agent,
    descriptor: ProviderDescriptor,
    model_id: String,
}

impl RemoteProvider {
    /// Queries `GET /info` to learn the model and its width.
    pub fn connect(config: RemoteConfig) -> Result<Self> {
        let agent: ureq::Agent = ureq::Agent::config_builder().timeout_global(Some(config.timeout)).build().into();
        let url = format!("{}/info", config.endpoint);
        let info: InfoResponse = agent
            .get(&url)
            .call()
            .and_then(|mut r| r.body_mut().read_json())
            .map_err(|e| Error::ProviderUnreachable(format!("{url}: {e}")))?;
        let descriptor = ProviderDescriptor {
            provider_id: format!("remote:{}", info.model_id),
            kind: ProviderKind::Remote,
            dim: info.dim,
            languages: info.languages,
            endpoint: Some(config.endpoint.clone()),
        };
        descriptor.validate()?;
        Ok(RemoteProvider { config, agent, descriptor, model_id: info.model_id })
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    fn post_batch(&self, texts: &[&str], lang: Lang) -> Result<Vec<Embedding>> {
        let url = format!("{}/embed", self.config.endpoint);
        let body = EmbedRequest { texts: texts.iter().map(|t| t.to_string()).collect(), lang };
        let mut last_err = None;
        let mut response = None;
        for _ in 0..=self.config.retries {
            match self.agent.post(&url).send_json(&body).and_then(|mut r| r.body_mut().read_json::<EmbedResponse>()) {
                Ok(r) => {
                    response = Some(r);
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        let response = response.ok_or_else(|| {
            Error::ProviderUnreachable(format!("{url}: {}", last_err.map(|e| e.to_string()).unwrap_or_default()))
        })?;
        let dim = self.descriptor.dim;
        if response.dim != dim {
            return Err(Error::DimMismatch { expected: dim, actual: response.dim });
        }
        if response.vectors.len() != texts.len() {
            return Err(Error::ProviderUnreachable(format!(
                "{url}: {} vectors for {} texts",
                response.vectors.len(),
                texts.len()
            )));
        }
        let id = &self.descriptor.provider_id;
        response
            .vectors
            .iter()
            .map(|v| {
                if v.len() != dim {
                    return Err(Error::DimMismatch { expected: dim, actual: v.len() });
                }
                Embedding::from_raw(v, id, &response.model_id)
            })
            .collect()
    }
}

impl EmbeddingProvider for RemoteProvider {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.descriptor
    }

    fn compute(&self, texts: &[&str], lang: Lang) -> Result<Vec<Embedding>> {
        let batches: Vec<&[&str]> = texts.chunks(self.config.max_batch.max(1)).collect();
        let mut out = Vec::with_capacity(texts.len());
        for wave in batches.chunks(self.config.max_in_flight.max(1)) {
            let results: Vec<Result<Vec<Embedding>>> = std::thread::scope(|s| {
                let handles: Vec<_> = wave.iter().map(|b| s.spawn(move || self.post_batch(b, lang))).collect();
                handles.into_iter().map(|h| h.join().expect("embedding request thread panicked")).collect()
            });
            for r in results {
                out.extend(r?);
            }
        }
        Ok(out)
    }
}
