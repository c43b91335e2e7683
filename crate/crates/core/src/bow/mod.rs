//! Bag-of-words baseline: tokenizer, stop words, rule-based lemmatizer,
//! vocabulary and raw term-count vectors.

mod lemma;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use lemma::Lemmatizer;

use crate::error::{Error, Result};

const STOPWORDS: &str = include_str!("../../data/stopwords.txt");
const LEMMA_EXCEPTIONS: &str = include_str!("../../data/lemma_exceptions.tsv");

/// Lowercases and splits on every non-alphanumeric code point.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Stop-word list plus lemmatizer.  Both source files are hashed into
/// [`Pipeline::fingerprint`], which in turn feeds [`Vocabulary::version`].
#[derive(Debug, Clone)]
pub struct Pipeline {
    stopwords: BTreeSet<String>,
    lemmatizer: Lemmatizer,
    fingerprint: String,
}

impl Pipeline {
    /// Builds a pipeline from the contents of a `stopwords.txt` (one word per
    /// line) and a `lemma_exceptions.tsv` (`surface<TAB>lemma`).
    pub fn from_sources(stopwords: &str, lemma_exceptions: &str) -> Result<Self> {
        let stopwords = stopwords
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let lemmatizer = Lemmatizer::from_tsv(lemma_exceptions)?;
        let mut h = Sha256::new();
        h.update(b"stopwords\0");
        h.update(stopwords_digest(&stopwords));
        h.update(b"lemmas\0");
        h.update(lemma_exceptions.as_bytes());
        Ok(Pipeline { stopwords, lemmatizer, fingerprint: hex::encode(h.finalize()) })
    }

    pub fn from_files(stopwords: &Path, lemma_exceptions: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(stopwords).map_err(|e| Error::io(stopwords, e))?;
        let l = std::fs::read_to_string(lemma_exceptions).map_err(|e| Error::io(lemma_exceptions, e))?;
        Pipeline::from_sources(&s, &l)
    }

    /// The shipped stop-word list and lemma exceptions.
    pub fn shipped() -> &'static Pipeline {
        static SHIPPED: OnceLock<Pipeline> = OnceLock::new();
        SHIPPED.get_or_init(|| Pipeline::from_sources(STOPWORDS, LEMMA_EXCEPTIONS).expect("shipped data is valid"))
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    /// `None` for stop words.  A lemma that is itself a stop word ("doing" ->
    /// "do") is dropped too.
    pub fn normalize_token(&self, token: &str) -> Option<String> {
        if self.is_stopword(token) {
            return None;
        }
        let lemma = self.lemmatizer.lemmatize(token);
        (!self.is_stopword(&lemma)).then_some(lemma)
    }

    pub fn lemmas(&self, text: &str) -> Vec<String> {
        tokenize(text).iter().filter_map(|t| self.normalize_token(t)).collect()
    }
}

fn stopwords_digest(words: &BTreeSet<String>) -> Vec<u8> {
    let mut h = Sha256::new();
    for w in words {
        h.update(w.as_bytes());
        h.update(b"\n");
    }
    h.finalize().to_vec()
}

/// Normalizes one token with the shipped pipeline.
pub fn normalize_token(token: &str) -> Option<String> {
    Pipeline::shipped().normalize_token(token)
}

/// Sorted, deduplicated lemmas.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    version: String,
}

impl Vocabulary {
    fn from_terms(terms: BTreeSet<String>, pipeline: &Pipeline) -> Self {
        let terms: Vec<String> = terms.into_iter().collect();
        let mut h = Sha256::new();
        h.update(pipeline.fingerprint().as_bytes());
        for t in &terms {
            h.update(b"\n");
            h.update(t.as_bytes());
        }
        Vocabulary { terms, version: hex::encode(h.finalize()) }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    /// One term per line.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut body = self.terms.join("\n");
        body.push('\n');
        std::fs::write(path, body).map_err(|e| Error::io(path, e))
    }

    /// Reads a saved vocabulary; terms are re-filtered and re-sorted under
    /// `pipeline`, so the version matches a fresh build.
    pub fn load(path: &Path, pipeline: &Pipeline) -> Result<Self> {
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let terms = body
            .lines()
            .map(str::trim)
            .filter(|t| !t.is_empty() && !pipeline.is_stopword(t))
            .map(String::from)
            .collect();
        Ok(Vocabulary::from_terms(terms, pipeline))
    }
}

/// Union of normalized lemmas over the corpus.  An empty result is allowed;
/// check [`Vocabulary::is_empty`].
pub fn build_vocabulary<S: AsRef<str>>(corpus: &[S]) -> Result<Vocabulary> {
    build_vocabulary_with(corpus, Pipeline::shipped())
}

pub fn build_vocabulary_with<S: AsRef<str>>(corpus: &[S], pipeline: &Pipeline) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let terms = corpus.iter().flat_map(|t| pipeline.lemmas(t.as_ref())).collect();
    Ok(Vocabulary::from_terms(terms, pipeline))
}

/// Sparse term counts over a vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    pub dim: usize,
    pub entries: BTreeMap<usize, u32>,
}

impl CountVector {
    /// All-zero vectors arise from stop-word-only or out-of-vocabulary text.
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for (&i, &c) in &self.entries {
            v[i] = c as f64;
        }
        v
    }
}

pub fn vectorize(text: &str, vocab: &Vocabulary) -> CountVector {
    vectorize_with(text, vocab, Pipeline::shipped())
}

pub fn vectorize_with(text: &str, vocab: &Vocabulary, pipeline: &Pipeline) -> CountVector {
    let mut entries = BTreeMap::new();
    for lemma in pipeline.lemmas(text) {
        if let Some(i) = vocab.index_of(&lemma) {
            *entries.entry(i).or_insert(0) += 1;
        }
    }
    CountVector { dim: vocab.dim(), entries }
}
