use std::collections::HashMap;
use std::sync::Arc;

use arc_swap::ArcSwap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify, clamp_score};
use crate::error::{Error, Result};
use crate::model::{BinaryLabel, Question, SimilarityValue};
use crate::providers::{Embedding, NORM_TOLERANCE};

/// Rows per parallel task once a scan is large enough to split.
const PAR_ROWS: usize = 4096;
/// Below this many multiply-adds a scan stays on the calling thread.
const PAR_MIN_WORK: usize = 8 << 20;

/// Immutable question bank: questions plus a contiguous row-major `f32`
/// matrix of their embeddings.
#[derive(Debug, Clone)]
pub struct BankSnapshot {
    questions: Vec<Question>,
    matrix: Vec<f32>,
    zero: Vec<bool>,
    index: HashMap<String, usize>,
    dim: usize,
    provider_id: String,
    version: u64,
}

/// A scored bank row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub index: usize,
    pub similarity: SimilarityValue,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedMatch {
    pub question_id: String,
    pub similarity: SimilarityValue,
    pub label: BinaryLabel,
    /// 1-based.
    pub rank: usize,
    #[serde(default)]
    pub degenerate: bool,
}

impl BankSnapshot {
    pub fn empty(provider_id: impl Into<String>, dim: usize) -> Self {
        BankSnapshot {
            questions: Vec::new(),
            matrix: Vec::new(),
            zero: Vec::new(),
            index: HashMap::new(),
            dim,
            provider_id: provider_id.into(),
            version: 0,
        }
    }

    pub fn new(
        provider_id: impl Into<String>,
        dim: usize,
        version: u64,
        entries: impl IntoIterator<Item = (Question, Embedding)>,
    ) -> Result<Self> {
        let mut bank = BankSnapshot::empty(provider_id, dim);
        bank.version = version;
        bank.push_all(entries)?;
        Ok(bank)
    }

    /// A copy with `entries` appended and the version bumped.
    pub fn with_appended(&self, entries: impl IntoIterator<Item = (Question, Embedding)>) -> Result<Self> {
        let mut next = self.clone();
        next.push_all(entries)?;
        next.version += 1;
        Ok(next)
    }

    fn push_all(&mut self, entries: impl IntoIterator<Item = (Question, Embedding)>) -> Result<()> {
        for (q, e) in entries {
            if e.dim() != self.dim {
                return Err(Error::DimMismatch { expected: self.dim, actual: e.dim() });
            }
            if e.provider_id != self.provider_id {
                return Err(Error::ProviderMismatch { bank: self.provider_id.clone(), requested: e.provider_id });
            }
            let zero = e.is_zero();
            if !zero && (e.norm() - 1.0).abs() > NORM_TOLERANCE {
                return Err(Error::ZeroVector);
            }
            if self.index.contains_key(&q.id) {
                return Err(Error::DuplicateId { id: q.id });
            }
            self.index.insert(q.id.clone(), self.questions.len());
            self.matrix.extend_from_slice(&e.values);
            self.zero.push(zero);
            self.questions.push(q);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provider_id(&self) -> &str {
        &self.provider_id
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn questions(&self) -> &[Question] {
        &self.questions
    }

    pub fn question(&self, index: usize) -> &Question {
        &self.questions[index]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&Question> {
        self.position(id).map(|i| &self.questions[i])
    }

    pub fn row(&self, index: usize) -> &[f32] {
        &self.matrix[index * self.dim..(index + 1) * self.dim]
    }

    /// Raw dot product of `query` with every row.
    pub fn scores(&self, query: &[f32]) -> Result<Vec<f64>> {
        if query.len() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, actual: query.len() });
        }
        let mut out = vec![0.0f64; self.len()];
        if self.dim == 0 || out.is_empty() {
            return Ok(out);
        }
        if self.len() * self.dim >= PAR_MIN_WORK {
            out.par_chunks_mut(PAR_ROWS).enumerate().for_each(|(c, chunk)| {
                let start = c * PAR_ROWS * self.dim;
                scan(&self.matrix[start..start + chunk.len() * self.dim], query, chunk);
            });
        } else {
            scan(&self.matrix, query, &mut out);
        }
        Ok(out)
    }

    /// The `k` best rows by (similarity desc, id asc).  Exact.
    pub fn top_hits(&self, query: &Embedding, k: usize) -> Result<Vec<Hit>> {
        let raw = self.scores(&query.values)?;
        let query_zero = query.is_zero();
        let mut hits: Vec<Hit> = raw
            .iter()
            .enumerate()
            .map(|(index, &s)| {
                let degenerate = query_zero || self.zero[index];
                let similarity = if degenerate { SimilarityValue::new(0.0) } else { clamp_score(s) };
                Hit { index, similarity, degenerate }
            })
            .collect();
        let order = |a: &Hit, b: &Hit| {
            b.similarity
                .get()
                .total_cmp(&a.similarity.get())
                .then_with(|| self.questions[a.index].id.cmp(&self.questions[b.index].id))
        };
        let k = k.min(hits.len());
        if k == 0 {
            return Ok(Vec::new());
        }
        if k < hits.len() {
            hits.select_nth_unstable_by(k - 1, order);
            hits.truncate(k);
        }
        hits.sort_unstable_by(order);
        Ok(hits)
    }

    /// Top-k with labels; `cutoff` gives the threshold for a bank question.
    pub fn top_k(&self, query: &Embedding, k: usize, cutoff: impl Fn(&Question) -> f64) -> Result<Vec<RankedMatch>> {
        Ok(self
            .top_hits(query, k)?
            .into_iter()
            .enumerate()
            .map(|(i, h)| {
                let q = &self.questions[h.index];
                RankedMatch {
                    question_id: q.id.clone(),
                    similarity: h.similarity,
                    label: classify(h.similarity, cutoff(q)),
                    rank: i + 1,
                    degenerate: h.degenerate,
                }
            })
            .collect())
    }
}

/// Four rows at a time so the query is loaded once per block.  Each row keeps
/// its own left-to-right accumulator, matching [`super::dot`] bit for bit.
fn scan(matrix: &[f32], query: &[f32], out: &mut [f64]) {
    let dim = query.len();
    let mut blocks = matrix.chunks_exact(4 * dim);
    let mut o = 0;
    for block in &mut blocks {
        let (r0, rest) = block.split_at(dim);
        let (r1, rest) = rest.split_at(dim);
        let (r2, r3) = rest.split_at(dim);
        let (mut a0, mut a1, mut a2, mut a3) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for j in 0..dim {
            let q = query[j] as f64;
            a0 += r0[j] as f64 * q;
            a1 += r1[j] as f64 * q;
            a2 += r2[j] as f64 * q;
            a3 += r3[j] as f64 * q;
        }
        out[o..o + 4].copy_from_slice(&[a0, a1, a2, a3]);
        o += 4;
    }
    for row in blocks.remainder().chunks_exact(dim) {
        out[o] = super::dot(row, query);
        o += 1;
    }
}

/// The currently published snapshot.  Readers take a cheap `Arc` and are
/// never blocked by a writer swapping in a new version.
#[derive(Debug)]
pub struct PublishedBank {
    current: ArcSwap<BankSnapshot>,
}

impl PublishedBank {
    pub fn new(snapshot: BankSnapshot) -> Self {
        PublishedBank { current: ArcSwap::from_pointee(snapshot) }
    }

    pub fn load(&self) -> Arc<BankSnapshot> {
        self.current.load_full()
    }

    pub fn publish(&self, snapshot: BankSnapshot) {
        self.current.store(Arc::new(snapshot));
    }
}
