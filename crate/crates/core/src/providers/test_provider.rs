use super::{Embedding, EmbeddingProvider, ProviderDescriptor, ProviderKind};
use crate::error::{Error, Result};
use crate::model::Lang;
use crate::prng::{fnv1a64, SplitMix64};

/// Deterministic pseudo-embeddings for tests and offline runs.
///
/// The vector is a pure function of `(text, dim)`: SplitMix64 seeded with the
/// FNV-1a hash of the UTF-8 text produces `dim` Irwin-Hall draws, which are
/// then normalized.  Any language is accepted.
#[derive(Debug, Clone)]
pub struct TestProvider {
    descriptor: ProviderDescriptor,
}

impl TestProvider {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("test provider needs dim > 0".into()));
        }
        Ok(TestProvider {
            descriptor: ProviderDescriptor {
                provider_id: format!("test-{dim}"),
                kind: ProviderKind::Test,
                dim,
                languages: Lang::ALL.to_vec(),
                endpoint: None,
            },
        })
    }

    pub fn raw_vector(text: &str, dim: usize) -> Vec<f64> {
        let mut rng = SplitMix64::new(fnv1a64(text.as_bytes()));
        (0..dim).map(|_| rng.next_gaussian_ish()).collect()
    }
}

impl EmbeddingProvider for TestProvider {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.descriptor
    }

    fn compute(&self, texts: &[&str], _lang: Lang) -> Result<Vec<Embedding>> {
        let id = &self.descriptor.provider_id;
        texts
            .iter()
            .map(|t| Embedding::from_raw(&TestProvider::raw_vector(t, self.descriptor.dim), id, id))
            .collect()
    }
}
