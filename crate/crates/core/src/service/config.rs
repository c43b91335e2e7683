//! Service configuration: a TOML file plus environment overrides.
//!
//! ```toml
//! provider = "remote"                 # remote | test:<dim> | bow:<vocab.txt> | store:<file.emb1>
//! endpoint = "http://127.0.0.1:8700"  # remote encoder
//! data_dir = "qbank-data"
//! addr = "127.0.0.1:8080"
//! default_k = 10
//! latency_budget_ms = 30
//! global_cutoff = 0.5
//! ```
//!
//! `QBANK_ENDPOINT` and `QBANK_DATA_DIR` override the file.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::bow::{Pipeline, Vocabulary};
use crate::error::{Error, Result};
use crate::providers::{
    BowProvider, EmbeddingProvider, ExternalTranslator, FixtureTranslator, RemoteConfig, RemoteProvider, StoreProvider,
    TestProvider, Translator,
};

pub const ENV_ENDPOINT: &str = "QBANK_ENDPOINT";
pub const ENV_DATA_DIR: &str = "QBANK_DATA_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub provider: String,
    pub endpoint: String,
    pub data_dir: PathBuf,
    pub addr: String,
    pub default_k: usize,
    pub latency_budget_ms: u64,
    pub global_cutoff: f64,
    pub max_batch: usize,
    pub max_in_flight: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            provider: "remote".into(),
            endpoint: "http://127.0.0.1:8700".into(),
            data_dir: PathBuf::from("qbank-data"),
            addr: "127.0.0.1:8080".into(),
            default_k: 10,
            latency_budget_ms: 30,
            global_cutoff: 0.5,
            max_batch: 64,
            max_in_flight: 4,
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads `path` if given (defaults otherwise), then applies the process
    /// environment.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut c = match path {
            Some(p) => ServiceConfig::from_toml(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
            None => ServiceConfig::default(),
        };
        c.apply_env(|k| std::env::var(k).ok());
        Ok(c)
    }

    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        if let Some(v) = lookup(ENV_ENDPOINT).filter(|v| !v.is_empty()) {
            self.endpoint = v;
        }
        if let Some(v) = lookup(ENV_DATA_DIR).filter(|v| !v.is_empty()) {
            self.data_dir = PathBuf::from(v);
        }
    }

    pub fn latency_budget(&self) -> Duration {
        Duration::from_millis(self.latency_budget_ms)
    }

    pub fn provider_spec(&self) -> Result<ProviderSpec> {
        self.provider.parse()
    }

    pub fn remote_config(&self, endpoint: Option<&str>) -> RemoteConfig {
        let mut rc = RemoteConfig::new(endpoint.unwrap_or(&self.endpoint));
        rc.max_batch = self.max_batch;
        rc.max_in_flight = self.max_in_flight;
        rc
    }
}

/// A provider named on the command line or in the config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderSpec {
    /// Remote encoder, at the given endpoint or the configured one.
    Remote(Option<String>),
    Test(usize),
    Bow(PathBuf),
    Store(PathBuf),
}

impl FromStr for ProviderSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let need = |what: &str| arg.filter(|a| !a.is_empty()).ok_or_else(|| Error::Config(format!("provider {kind:?} needs {what}")));
        match kind.to_ascii_lowercase().as_str() {
            "remote" => Ok(ProviderSpec::Remote(arg.map(str::to_string))),
            "test" => {
                let dim = arg.unwrap_or("768");
                dim.parse().map(ProviderSpec::Test).map_err(|_| Error::Config(format!("bad test dimension {dim:?}")))
            }
            "bow" => Ok(ProviderSpec::Bow(need("a vocabulary path")?.into())),
            "store" => Ok(ProviderSpec::Store(need("a store path")?.into())),
            other => Err(Error::Config(format!("unknown provider {other:?}"))),
        }
    }
}

impl ProviderSpec {
    pub fn build(&self, config: &ServiceConfig) -> Result<Arc<dyn EmbeddingProvider>> {
        Ok(match self {
            ProviderSpec::Remote(endpoint) => Arc::new(RemoteProvider::connect(config.remote_config(endpoint.as_deref()))?),
            ProviderSpec::Test(dim) => Arc::new(TestProvider::new(*dim)?),
            ProviderSpec::Bow(path) => Arc::new(BowProvider::new(Vocabulary::load(path, Pipeline::shipped())?)?),
            ProviderSpec::Store(path) => Arc::new(StoreProvider::open(path)?),
        })
    }
}

/// `fixture` (the shipped table), `fixture:<file.tsv>`, or an `http(s)://`
/// translation endpoint.
pub fn build_translator(spec: &str) -> Result<Arc<dyn Translator>> {
    if spec.starts_with("http://") || spec.starts_with("https://") {
        return Ok(Arc::new(ExternalTranslator::new(spec, Duration::from_secs(30))));
    }
    match spec.split_once(':') {
        None if spec == "fixture" => Ok(Arc::new(FixtureTranslator::shipped().clone())),
        Some(("fixture", path)) => Ok(Arc::new(FixtureTranslator::from_file(Path::new(path))?)),
        _ => Err(Error::Config(format!("unknown translator {spec:?}"))),
    }
}
