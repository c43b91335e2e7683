//! Embedding providers and the translation hook.
//!
//! Every provider returns L2-normalized `f32` vectors (the bag-of-words
//! provider may also return an all-zero vector for text with no in-vocabulary
//! lemma, flagged by [`Embedding::is_zero`]).  Normalizing at this boundary
//! lets the search kernels use plain dot products.

mod bow_provider;
mod remote;
pub(crate) mod store;
mod test_provider;
mod translate;

use serde::{Deserialize, Serialize};

pub use bow_provider::BowProvider;
pub use remote::{EmbedRequest, EmbedResponse, InfoResponse, RemoteConfig, RemoteProvider};
pub use store::{load_embeddings, read_store, store_embeddings, StoreContents, StoreProvider, StoreWriter, MAGIC};
pub use test_provider::TestProvider;
pub use translate::{ExternalTranslator, FixtureTranslator, TranslateRequest, TranslateResponse, Translator};

use crate::error::{Error, Result};
use crate::model::Lang;

/// Tolerance on `‖v‖₂` for a vector to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub values: Vec<f32>,
    pub provider_id: String,
    pub model_id: String,
    pub normalized: bool,
}

impl Embedding {
    /// Normalizes `values`; fails on non-finite input or a zero vector.
    pub fn from_raw(values: &[f64], provider_id: &str, model_id: &str) -> Result<Self> {
        Ok(Embedding {
            values: normalize(values)?,
            provider_id: provider_id.to_string(),
            model_id: model_id.to_string(),
            normalized: true,
        })
    }

    /// Like [`Embedding::from_raw`] but maps a zero vector to a flagged zero
    /// embedding instead of an error.
    pub fn from_raw_or_zero(values: &[f64], provider_id: &str, model_id: &str) -> Result<Self> {
        match Embedding::from_raw(values, provider_id, model_id) {
            Err(Error::ZeroVector) => Ok(Embedding::zero(values.len(), provider_id, model_id)),
            other => other,
        }
    }

    pub fn zero(dim: usize, provider_id: &str, model_id: &str) -> Self {
        Embedding {
            values: vec![0.0; dim],
            provider_id: provider_id.to_string(),
            model_id: model_id.to_string(),
            normalized: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|&v| v as f64 * v as f64).sum::<f64>().sqrt()
    }
}

/// Scales to unit L2 norm, computed in `f64` and stored as `f32`.
pub fn normalize(values: &[f64]) -> Result<Vec<f32>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonfiniteValue);
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(values.iter().map(|v| (v / norm) as f32).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProviderKind {
    Bow,
    Remote,
    Store,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderDescriptor {
    pub provider_id: String,
    pub kind: ProviderKind,
    pub dim: usize,
    pub languages: Vec<Lang>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
}

impl ProviderDescriptor {
    pub fn supports(&self, lang: Lang) -> bool {
        self.languages.contains(&lang)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config(format!("provider {} has dimension 0", self.provider_id)));
        }
        match self.kind {
            ProviderKind::Remote if self.endpoint.is_none() => {
                Err(Error::Config("remote provider requires an endpoint".into()))
            }
            ProviderKind::Bow if self.languages != [Lang::En] => {
                Err(Error::Config("bag-of-words provider supports English only".into()))
            }
            _ => Ok(()),
        }
    }
}

pub trait EmbeddingProvider: Send + Sync {
    fn descriptor(&self) -> &ProviderDescriptor;

    /// Provider-specific computation; callers should use [`EmbeddingProvider::embed`].
    fn compute(&self, texts: &[&str], lang: Lang) -> Result<Vec<Embedding>>;

    /// One embedding per text, in order, with the output contract checked:
    /// language supported, constant dimension, finite and unit-norm (or a
    /// flagged zero vector from the bag-of-words provider).
    fn embed(&self, texts: &[&str], lang: Lang) -> Result<Vec<Embedding>> {
        let d = self.descriptor();
        if !d.supports(lang) {
            return Err(Error::UnsupportedLanguage { provider: d.provider_id.clone(), lang: lang.code().into() });
        }
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let out = self.compute(texts, lang)?;
        if out.len() != texts.len() {
            return Err(Error::ProviderUnreachable(format!(
                "{} returned {} vectors for {} texts",
                d.provider_id,
                out.len(),
                texts.len()
            )));
        }
        for e in &out {
            if e.dim() != d.dim {
                return Err(Error::DimMismatch { expected: d.dim, actual: e.dim() });
            }
            if e.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonfiniteValue);
            }
            let zero_ok = d.kind == ProviderKind::Bow && e.is_zero();
            if !zero_ok && (!e.normalized || (e.norm() - 1.0).abs() > NORM_TOLERANCE) {
                return Err(Error::ZeroVector);
            }
        }
        Ok(out)
    }

    fn embed_one(&self, text: &str, lang: Lang) -> Result<Embedding> {
        Ok(self.embed(&[text], lang)?.remove(0))
    }
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for std::sync::Arc<P> {
    fn descriptor(&self) -> &ProviderDescriptor {
        (**self).descriptor()
    }

    fn compute(&self, texts: &[&str], lang: Lang) -> Result<Vec<Embedding>> {
        (**self).compute(texts, lang)
    }
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for Box<P> {
    fn descriptor(&self) -> &ProviderDescriptor {
        (**self).descriptor()
    }

    fn compute(&self, texts: &[&str], lang: Lang) -> Result<Vec<Embedding>> {
        (**self).compute(texts, lang)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_three_four() {
        let v = normalize(&[3.0, 4.0]).unwrap();
        assert_eq!(v, vec![0.6f32, 0.8f32]);
    }

    #[test]
    fn normalize_is_idempotent_on_unit_vectors() {
        let v = normalize(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(v, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn normalize_errors() {
        assert!(matches!(normalize(&[0.0, 0.0]), Err(Error::ZeroVector)));
        assert!(matches!(normalize(&[f64::NAN, 1.0]), Err(Error::NonfiniteValue)));
    }

    #[test]
    fn descriptor_rules() {
        let mut d = ProviderDescriptor {
            provider_id: "r".into(),
            kind: ProviderKind::Remote,
            dim: 4,
            languages: vec![Lang::En, Lang::Ko],
            endpoint: None,
        };
        assert!(d.validate().is_err());
        d.endpoint = Some("http://localhost:1".into());
        assert!(d.validate().is_ok());
        d.kind = ProviderKind::Bow;
        assert!(d.validate().is_err());
    }

    struct Broken(ProviderDescriptor, Vec<f32>);

    impl EmbeddingProvider for Broken {
        fn descriptor(&self) -> &ProviderDescriptor {
            &self.0
        }
        fn compute(&self, texts: &[&str], _: Lang) -> Result<Vec<Embedding>> {
            Ok(texts
                .iter()
                .map(|_| Embedding { values: self.1.clone(), provider_id: "x".into(), model_id: "x".into(), normalized: true })
                .collect())
        }
    }

    #[test]
    fn embed_checks_contract() {
        let d = ProviderDescriptor { provider_id: "x".into(), kind: ProviderKind::Test, dim: 2, languages: vec![Lang::En], endpoint: None };
        let p = Broken(d.clone(), vec![1.0, 0.0, 0.0]);
        assert!(matches!(p.embed(&["a"], Lang::En), Err(Error::DimMismatch { expected: 2, actual: 3 })));
        let p = Broken(d.clone(), vec![f32::INFINITY, 0.0]);
        assert!(matches!(p.embed(&["a"], Lang::En), Err(Error::NonfiniteValue)));
        let p = Broken(d.clone(), vec![2.0, 0.0]);
        assert!(p.embed(&["a"], Lang::En).is_err());
        let p = Broken(d, vec![1.0, 0.0]);
        assert!(matches!(p.embed(&["a"], Lang::Ko), Err(Error::UnsupportedLanguage { .. })));
        assert_eq!(p.embed(&["a", "b"], Lang::En).unwrap().len(), 2);
    }
}
