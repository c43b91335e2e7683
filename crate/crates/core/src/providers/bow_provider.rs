use std::sync::Arc;

use super::{Embedding, EmbeddingProvider, ProviderDescriptor, ProviderKind};
use crate::bow::{vectorize_with, Pipeline, Vocabulary};
use crate::error::{Error, Result};
use crate::model::Lang;

/// Term-count vectors over a fixed vocabulary.  English only: Korean text must
/// be translated first.
#[derive(Debug, Clone)]
pub struct BowProvider {
    vocab: Arc<Vocabulary>,
    pipeline: Pipeline,
    descriptor: ProviderDescriptor,
}

impl BowProvider {
    pub fn new(vocab: Vocabulary) -> Result<Self> {
        BowProvider::with_pipeline(vocab, Pipeline::shipped().clone())
    }

    pub fn with_pipeline(vocab: Vocabulary, pipeline: Pipeline) -> Result<Self> {
        if vocab.is_empty() {
            return Err(Error::Config("bag-of-words vocabulary is empty".into()));
        }
        let descriptor = ProviderDescriptor {
            provider_id: format!("bow-{}", &vocab.version()[..12]),
            kind: ProviderKind::Bow,
            dim: vocab.dim(),
            languages: vec![Lang::En],
            endpoint: None,
        };
        Ok(BowProvider { vocab: Arc::new(vocab), pipeline, descriptor })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }
}

impl EmbeddingProvider for BowProvider {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.descriptor
    }

    fn compute(&self, texts: &[&str], _lang: Lang) -> Result<Vec<Embedding>> {
        let id = &self.descriptor.provider_id;
        texts
            .iter()
            .map(|t| {
                let counts = vectorize_with(t, &self.vocab, &self.pipeline);
                Embedding::from_raw_or_zero(&counts.to_dense(), id, id)
            })
            .collect()
    }
}
