//! Persisted question bank with an HTTP front end.
//!
//! On disk a bank directory holds:
//!
//! * `questions.jsonl`: one [`Question`] per line, append-only;
//! * `embeddings.emb1`: the matching vectors in the EMB1 store format;
//! * `profile.json`: the active [`ThresholdProfile`].
//!
//! A registration is written to the journal, then to the store, each synced,
//! before it is acknowledged.  On open, only questions present in both files
//! are kept, so a crash between the two writes loses the unacknowledged
//! question and nothing else.

pub mod config;
pub mod http;

use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU8, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use arc_swap::ArcSwap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::ThresholdProfile;
use crate::model::{BinaryLabel, Domain, Lang, Question, SimilarityValue};
use crate::providers::{read_store, Embedding, EmbeddingProvider, StoreWriter};
use crate::simeng::{BankSnapshot, PublishedBank};

pub const JOURNAL_FILE: &str = "questions.jsonl";
pub const STORE_FILE: &str = "embeddings.emb1";
pub const PROFILE_FILE: &str = "profile.json";

/// Where a simulated crash interrupts a registration.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum FailPoint {
    Off = 0,
    /// Journal line synced, store untouched.
    AfterJournal = 1,
    /// Journal line synced, store record half written.
    MidStore = 2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registered {
    pub id: String,
    pub dim: usize,
    pub version: u64,
    /// `false` when the question was already in the bank.
    pub created: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarMatch {
    pub id: String,
    pub text: String,
    pub lang: Lang,
    pub domain: Domain,
    pub similarity: SimilarityValue,
    pub label: BinaryLabel,
    pub cutoff: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarResponse {
    pub matches: Vec<SimilarMatch>,
    /// The query or some returned bank entry had a zero vector.
    pub degenerate: bool,
    pub bank_version: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub bank_size: usize,
    pub dim: usize,
    pub provider_id: String,
    pub bank_version: u64,
}

/// What [`BankStore::open`] had to repair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Recovery {
    pub kept: usize,
    pub dropped_questions: usize,
    pub dropped_embeddings: usize,
    pub truncated: bool,
}

impl Recovery {
    pub fn is_clean(&self) -> bool {
        self.dropped_questions == 0 && self.dropped_embeddings == 0 && !self.truncated
    }
}

struct Files {
    journal: File,
    store: StoreWriter,
    poisoned: bool,
}

pub struct BankStore {
    dir: PathBuf,
    provider: Arc<dyn EmbeddingProvider>,
    bank: PublishedBank,
    profile: ArcSwap<ThresholdProfile>,
    files: Mutex<Files>,
    recovery: Recovery,
    latency_budget: Option<Duration>,
    fail_point: AtomicU8,
}

impl std::fmt::Debug for BankStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BankStore")
            .field("dir", &self.dir)
            .field("provider", &self.provider.descriptor().provider_id)
            .field("bank_size", &self.bank.load().len())
            .finish()
    }
}

impl BankStore {
    /// Opens or creates the bank in `dir`, repairing it after a crash.
    /// `default_profile` is used when no profile has been saved.
    pub fn open(dir: &Path, provider: Arc<dyn EmbeddingProvider>, default_profile: ThresholdProfile) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let desc = provider.descriptor().clone();
        let journal_path = dir.join(JOURNAL_FILE);
        let store_path = dir.join(STORE_FILE);

        let (questions, torn_line) = read_journal(&journal_path)?;
        let (records, store_truncated, store_exists) = if store_path.exists() {
            let bytes = std::fs::read(&store_path).map_err(|e| Error::io(&store_path, e))?;
            let contents = read_store(&bytes, true)?;
            if contents.provider_id != desc.provider_id {
                return Err(Error::ProviderMismatch { bank: contents.provider_id, requested: desc.provider_id });
            }
            if contents.dim != desc.dim {
                return Err(Error::DimMismatch { expected: contents.dim, actual: desc.dim });
            }
            (contents.records, contents.truncated, true)
        } else {
            (Vec::new(), false, false)
        };

        let mut vectors: HashMap<String, Vec<f32>> = HashMap::with_capacity(records.len());
        for (id, v) in records.iter() {
            vectors.entry(id.clone()).or_insert_with(|| v.clone());
        }
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for q in &questions {
            if !seen.insert(q.id.clone()) {
                continue;
            }
            if let Some(v) = vectors.get(&q.id) {
                let e = Embedding {
                    normalized: v.iter().any(|&x| x != 0.0),
                    values: v.clone(),
                    provider_id: desc.provider_id.clone(),
                    model_id: desc.provider_id.clone(),
                };
                entries.push((q.clone(), e));
            }
        }
        let recovery = Recovery {
            kept: entries.len(),
            dropped_questions: questions.len() - entries.len(),
            dropped_embeddings: records.len() - entries.len(),
            truncated: store_truncated || torn_line,
        };

        if !recovery.is_clean() || !store_exists {
            checkpoint(&journal_path, &store_path, &desc.provider_id, desc.dim, &entries)?;
        }
        let version = u64::from(!entries.is_empty());
        let snapshot = BankSnapshot::new(desc.provider_id.clone(), desc.dim, version, entries)?;

        let journal = OpenOptions::new().append(true).create(true).open(&journal_path).map_err(|e| Error::io(&journal_path, e))?;
        let len = std::fs::metadata(&store_path).map_err(|e| Error::io(&store_path, e))?.len();
        let store = StoreWriter::append_to(&store_path, desc.dim, len)?;

        let profile_path = dir.join(PROFILE_FILE);
        let profile = if profile_path.exists() { ThresholdProfile::load(&profile_path)? } else { default_profile };
        profile.validate()?;

        Ok(BankStore {
            dir: dir.to_path_buf(),
            provider,
            bank: PublishedBank::new(snapshot),
            profile: ArcSwap::from_pointee(profile),
            files: Mutex::new(Files { journal, store, poisoned: false }),
            recovery,
            latency_budget: None,
            fail_point: AtomicU8::new(FailPoint::Off as u8),
        })
    }

    /// Logs queries whose scan exceeds `budget`.
    pub fn with_latency_budget(mut self, budget: Duration) -> Self {
        self.latency_budget = Some(budget);
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn recovery(&self) -> &Recovery {
        &self.recovery
    }

    pub fn provider(&self) -> &dyn EmbeddingProvider {
        self.provider.as_ref()
    }

    pub fn snapshot(&self) -> Arc<BankSnapshot> {
        self.bank.load()
    }

    pub fn health(&self) -> Health {
        let s = self.snapshot();
        Health { bank_size: s.len(), dim: s.dim(), provider_id: s.provider_id().to_string(), bank_version: s.version() }
    }

    #[doc(hidden)]
    pub fn set_fail_point(&self, point: FailPoint) {
        self.fail_point.store(point as u8, Ordering::SeqCst);
    }

    /// Rejects a request naming a provider other than the bank's.
    pub fn check_provider(&self, requested: Option<&str>) -> Result<()> {
        let bank = &self.provider.descriptor().provider_id;
        match requested {
            Some(r) if r != bank => Err(Error::ProviderMismatch { bank: bank.clone(), requested: r.to_string() }),
            _ => Ok(()),
        }
    }

    pub fn register(&self, text: &str, lang: Lang, domain: Domain) -> Result<Registered> {
        self.register_question(Question::new(None, text, lang, domain)?)
    }

    /// Embeds and persists `q`.  Registering the same `(id, text, lang)` again
    /// is a no-op; reusing an id for different text is [`Error::DuplicateId`].
    pub fn register_question(&self, q: Question) -> Result<Registered> {
        Ok(self.register_batch(vec![q])?.remove(0))
    }

    /// Registers several questions as one mutation (one version bump).
    pub fn register_batch(&self, questions: Vec<Question>) -> Result<Vec<Registered>> {
        let dim = self.provider.descriptor().dim;
        // Embed outside the writer lock; the provider may be remote.
        let mut fresh: Vec<(Question, Option<Embedding>)> = Vec::with_capacity(questions.len());
        {
            let snap = self.snapshot();
            let mut batch_ids: HashMap<&str, &Question> = HashMap::new();
            for q in &questions {
                if let Some(prev) = snap.get(&q.id).or_else(|| batch_ids.get(q.id.as_str()).copied()) {
                    if prev.text != q.text || prev.lang != q.lang {
                        return Err(Error::DuplicateId { id: q.id.clone() });
                    }
                    continue;
                }
                batch_ids.insert(&q.id, q);
            }
        }
        let mut by_lang: HashMap<Lang, Vec<usize>> = HashMap::new();
        for (i, q) in questions.iter().enumerate() {
            by_lang.entry(q.lang).or_default().push(i);
        }
        let mut embedded: Vec<Option<Embedding>> = vec![None; questions.len()];
        for (lang, idx) in by_lang {
            let texts: Vec<&str> = idx.iter().map(|&i| questions[i].text.as_str()).collect();
            for (i, e) in idx.into_iter().zip(self.provider.embed(&texts, lang)?) {
                embedded[i] = Some(e);
            }
        }
        fresh.extend(questions.into_iter().zip(embedded));

        let mut files = self.files.lock().map_err(|_| Error::Poisoned)?;
        if files.poisoned {
            return Err(Error::Poisoned);
        }
        let snap = self.snapshot();
        let mut out = Vec::with_capacity(fresh.len());
        let mut added: Vec<(Question, Embedding)> = Vec::new();
        for (q, e) in fresh {
            if let Some(prev) = snap.get(&q.id).or_else(|| added.iter().find(|(a, _)| a.id == q.id).map(|(a, _)| a)) {
                if prev.text != q.text || prev.lang != q.lang {
                    return Err(Error::DuplicateId { id: q.id });
                }
                out.push(Registered { id: q.id, dim, version: 0, created: false });
                continue;
            }
            out.push(Registered { id: q.id.clone(), dim, version: 0, created: true });
            added.push((q, e.expect("embedded above")));
        }
        if !added.is_empty() {
            if let Err(e) = self.persist(&mut files, &added) {
                files.poisoned = true;
                return Err(e);
            }
            self.bank.publish(snap.with_appended(added)?);
        }
        let version = self.snapshot().version();
        for r in &mut out {
            r.version = version;
        }
        Ok(out)
    }

    fn persist(&self, files: &mut Files, added: &[(Question, Embedding)]) -> Result<()> {
        let journal_path = self.dir.join(JOURNAL_FILE);
        let mut lines = String::new();
        for (q, _) in added {
            lines.push_str(&serde_json::to_string(q)?);
            lines.push('\n');
        }
        files.journal.write_all(lines.as_bytes()).map_err(|e| Error::io(&journal_path, e))?;
        files.journal.sync_data().map_err(|e| Error::io(&journal_path, e))?;

        let fail = self.fail_point.load(Ordering::SeqCst);
        if fail == FailPoint::AfterJournal as u8 {
            return Err(simulated_crash());
        }
        for (i, (q, e)) in added.iter().enumerate() {
            if fail == FailPoint::MidStore as u8 && i + 1 == added.len() {
                files.store.append_partial(&q.id, &e.values, 4 + q.id.len() + 2)?;
                files.store.sync()?;
                return Err(simulated_crash());
            }
            files.store.append(&q.id, &e.values)?;
        }
        files.store.sync()
    }

    /// Top-`k` bank questions for `text`, each labelled with the cutoff of its
    /// own domain.  `k = 0` returns nothing; a negative `k` is [`Error::BadK`].
    pub fn query_similar(&self, text: &str, lang: Lang, k: i64) -> Result<SimilarResponse> {
        if k < 0 {
            return Err(Error::BadK(k));
        }
        if text.trim().is_empty() {
            return Err(Error::EmptyText);
        }
        let snap = self.snapshot();
        if k == 0 || snap.is_empty() {
            return Ok(SimilarResponse { matches: Vec::new(), degenerate: false, bank_version: snap.version() });
        }
        let query = self.provider.embed_one(text, lang)?;
        let profile = self.profile.load();
        let started = Instant::now();
        let ranked = snap.top_k(&query, k as usize, |q| profile.cutoff_for(q.domain))?;
        if let Some(budget) = self.latency_budget {
            let took = started.elapsed();
            if took > budget {
                eprintln!("warning: bank scan took {took:?}, over the {budget:?} budget");
            }
        }
        let degenerate = query.is_zero() || ranked.iter().any(|m| m.degenerate);
        let matches = ranked
            .into_iter()
            .map(|m| {
                let q = snap.get(&m.question_id).expect("ranked ids come from the snapshot");
                SimilarMatch {
                    id: m.question_id,
                    text: q.text.clone(),
                    lang: q.lang,
                    domain: q.domain,
                    similarity: m.similarity,
                    label: m.label,
                    cutoff: profile.cutoff_for(q.domain),
                    rank: m.rank,
                }
            })
            .collect();
        Ok(SimilarResponse { matches, degenerate, bank_version: snap.version() })
    }

    pub fn profile(&self) -> ThresholdProfile {
        self.profile.load().as_ref().clone()
    }

    /// Validates, persists and swaps in `profile`.
    pub fn set_profile(&self, profile: ThresholdProfile) -> Result<()> {
        profile.validate()?;
        let path = self.dir.join(PROFILE_FILE);
        let tmp = crate::providers::store::tmp_path(&path);
        std::fs::write(&tmp, profile.to_json()? + "\n").map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        self.profile.store(Arc::new(profile));
        Ok(())
    }
}

fn simulated_crash() -> Error {
    Error::Io { path: PathBuf::from("<fail point>"), source: std::io::Error::other("simulated crash") }
}

/// Complete journal lines, plus whether a torn final line was dropped.
fn read_journal(path: &Path) -> Result<(Vec<Question>, bool)> {
    let text = match std::fs::read(path) {
        Ok(bytes) => String::from_utf8_lossy(&bytes).into_owned(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((Vec::new(), false)),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut lines: Vec<&str> = text.split('\n').collect();
    let tail = lines.pop().unwrap_or("");
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let q: Question = serde_json::from_str(line)
            .map_err(|e| Error::MalformedRow { row: i + 1, reason: format!("{}: {e}", path.display()) })?;
        out.push(q);
    }
    Ok((out, !tail.is_empty()))
}

/// Rewrites both files to hold exactly `entries`, via temporary files and
/// renames.
fn checkpoint(journal: &Path, store: &Path, provider_id: &str, dim: usize, entries: &[(Question, Embedding)]) -> Result<()> {
    use crate::providers::store::tmp_path;
    let tmp = tmp_path(store);
    let mut w = StoreWriter::create(&tmp, provider_id, dim)?;
    for (q, e) in entries {
        w.append(&q.id, &e.values)?;
    }
    w.sync()?;
    drop(w);

    let jtmp = tmp_path(journal);
    let mut lines = String::new();
    for (q, _) in entries {
        lines.push_str(&serde_json::to_string(q)?);
        lines.push('\n');
    }
    {
        let mut f = File::create(&jtmp).map_err(|e| Error::io(&jtmp, e))?;
        f.write_all(lines.as_bytes()).map_err(|e| Error::io(&jtmp, e))?;
        f.sync_all().map_err(|e| Error::io(&jtmp, e))?;
    }
    // Store first: a crash between the renames leaves extra embeddings, which
    // the next open drops.
    std::fs::rename(&tmp, store).map_err(|e| Error::io(store, e))?;
    std::fs::rename(&jtmp, journal).map_err(|e| Error::io(journal, e))?;
    if let Some(dir) = journal.parent() {
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::TestProvider;

    fn open(dir: &Path) -> BankStore {
        BankStore::open(dir, Arc::new(TestProvider::new(16).unwrap()), ThresholdProfile::fixed(0.5)).unwrap()
    }

    #[test]
    fn register_and_query_self() {
        let dir = tempfile::tempdir().unwrap();
        let bank = open(dir.path());
        let r = bank.register("Do you snore?", Lang::En, Domain::Sleep).unwrap();
        assert!(r.created);
        bank.register("How stressed are you?", Lang::En, Domain::Stress).unwrap();
        let resp = bank.query_similar("Do you snore?", Lang::En, 5).unwrap();
        assert_eq!(resp.matches[0].id, r.id);
        assert!((resp.matches[0].similarity.get() - 1.0).abs() < 1e-6);
        assert_eq!(resp.matches[0].label, BinaryLabel::Similar);
        assert_eq!(resp.matches.len(), 2);
    }

    #[test]
    fn idempotent_registration() {
        let dir = tempfile::tempdir().unwrap();
        let bank = open(dir.path());
        let a = bank.register("Do you snore?", Lang::En, Domain::Sleep).unwrap();
        let b = bank.register("Do you snore?", Lang::En, Domain::Sleep).unwrap();
        assert_eq!(a.id, b.id);
        assert!(!b.created);
        assert_eq!(bank.health().bank_size, 1);
        assert_eq!(a.version, b.version);
    }

    #[test]
    fn duplicate_id_with_other_text() {
        let dir = tempfile::tempdir().unwrap();
        let bank = open(dir.path());
        bank.register_question(Question::new(Some("x".into()), "one", Lang::En, Domain::Sleep).unwrap()).unwrap();
        let e = bank.register_question(Question::new(Some("x".into()), "two", Lang::En, Domain::Sleep).unwrap());
        assert!(matches!(e, Err(Error::DuplicateId { .. })));
    }

    #[test]
    fn bad_k_and_empty_bank() {
        let dir = tempfile::tempdir().unwrap();
        let bank = open(dir.path());
        assert!(bank.query_similar("x", Lang::En, 3).unwrap().matches.is_empty());
        assert!(matches!(bank.query_similar("x", Lang::En, -1), Err(Error::BadK(-1))));
        bank.register("x", Lang::En, Domain::Sleep).unwrap();
        assert!(bank.query_similar("x", Lang::En, 0).unwrap().matches.is_empty());
        assert_eq!(bank.query_similar("x", Lang::En, 50).unwrap().matches.len(), 1);
    }

    #[test]
    fn profile_fallback_and_persistence() {
        let dir = tempfile::tempdir().unwrap();
        let bank = open(dir.path());
        bank.register("Do you snore?", Lang::En, Domain::Sleep).unwrap();
        bank.set_profile(ThresholdProfile::fixed(0.6091).with_domain(Domain::Stress, 0.9)).unwrap();
        assert_eq!(bank.profile().global, 0.6091);
        let m = &bank.query_similar("Do you snore?", Lang::En, 1).unwrap().matches[0];
        assert_eq!(m.cutoff, 0.6091);
        assert!(matches!(bank.set_profile(ThresholdProfile::fixed(1.5)), Err(Error::InvalidCutoff(_))));
        drop(bank);
        assert_eq!(open(dir.path()).profile().global, 0.6091);
    }

    #[test]
    fn reopen_keeps_questions() {
        let dir = tempfile::tempdir().unwrap();
        let ids: Vec<_> = {
            let bank = open(dir.path());
            ["a", "b", "c"].iter().map(|t| bank.register(t, Lang::En, Domain::Sleep).unwrap().id).collect()
        };
        let bank = open(dir.path());
        assert!(bank.recovery().is_clean());
        let got: Vec<_> = bank.snapshot().questions().iter().map(|q| q.id.clone()).collect();
        assert_eq!(got, ids);
    }

    #[test]
    fn crash_after_journal_is_rolled_back() {
        for point in [FailPoint::AfterJournal, FailPoint::MidStore] {
            let dir = tempfile::tempdir().unwrap();
            {
                let bank = open(dir.path());
                bank.register("kept", Lang::En, Domain::Sleep).unwrap();
                bank.set_fail_point(point);
                assert!(bank.register("lost", Lang::En, Domain::Sleep).is_err());
                assert!(matches!(bank.register("later", Lang::En, Domain::Sleep), Err(Error::Poisoned)));
            }
            let bank = open(dir.path());
            assert_eq!(bank.recovery().dropped_questions, 1);
            let texts: Vec<_> = bank.snapshot().questions().iter().map(|q| q.text.clone()).collect();
            assert_eq!(texts, ["kept"]);
            bank.register("after", Lang::En, Domain::Sleep).unwrap();
            drop(bank);
            assert!(open(dir.path()).recovery().is_clean());
        }
    }

    #[test]
    fn provider_mismatch_on_reopen() {
        let dir = tempfile::tempdir().unwrap();
        open(dir.path());
        let other = BankStore::open(dir.path(), Arc::new(TestProvider::new(8).unwrap()), ThresholdProfile::fixed(0.5));
        assert!(matches!(other, Err(Error::ProviderMismatch { .. })));
    }
}
