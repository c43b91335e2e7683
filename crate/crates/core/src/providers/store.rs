//! `EMB1` embedding store.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "EMB1"                      4 bytes
//! dim                         u32
//! provider_id length, bytes   u32 + UTF-8
//! records until EOF:
//!   id length, id bytes       u32 + UTF-8
//!   values                    dim x f32
//! ```

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{Embedding, EmbeddingProvider, ProviderDescriptor, ProviderKind, NORM_TOLERANCE};
use crate::error::{Error, Result};
use crate::model::{content_id, Lang};

pub const MAGIC: &[u8; 4] = b"EMB1";

#[derive(Debug, Clone, PartialEq)]
pub struct StoreContents {
    pub provider_id: String,
    pub dim: usize,
    pub records: Vec<(String, Vec<f32>)>,
    /// Byte length of the header plus every complete record.
    pub valid_len: u64,
    /// Trailing bytes that did not form a complete record.
    pub truncated: bool,
}

impl StoreContents {
    pub fn into_embeddings(self) -> BTreeMap<String, Embedding> {
        let pid = self.provider_id;
        self.records
            .into_iter()
            .map(|(id, values)| {
                let norm = values.iter().map(|&v| v as f64 * v as f64).sum::<f64>().sqrt();
                let e = Embedding {
                    normalized: (norm - 1.0).abs() <= NORM_TOLERANCE,
                    values,
                    provider_id: pid.clone(),
                    model_id: pid.clone(),
                };
                (id, e)
            })
            .collect()
    }
}

/// Parses a store.  With `lenient`, an incomplete trailing record is dropped
/// and reported through [`StoreContents::truncated`]; otherwise it is
/// [`Error::TruncatedFile`].
pub fn read_store(bytes: &[u8], lenient: bool) -> Result<StoreContents> {
    let mut cur = Cursor { bytes, pos: 0 };
    if bytes.len() < 4 {
        return Err(if bytes.is_empty() || MAGIC.starts_with(bytes) { Error::TruncatedFile } else { Error::BadMagic });
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    cur.pos = 4;
    let dim = cur.u32().ok_or(Error::TruncatedFile)? as usize;
    let pid_len = cur.u32().ok_or(Error::TruncatedFile)? as usize;
    let provider_id = cur.utf8(pid_len).ok_or(Error::TruncatedFile)??;
    let mut records = Vec::new();
    let mut valid_len = cur.pos as u64;
    let mut truncated = false;
    while cur.pos < bytes.len() {
        match cur.record(dim) {
            Some(Ok(rec)) => {
                records.push(rec);
                valid_len = cur.pos as u64;
            }
            Some(Err(e)) => return Err(e),
            None if lenient => {
                truncated = true;
                break;
            }
            None => return Err(Error::TruncatedFile),
        }
    }
    Ok(StoreContents { provider_id, dim, records, valid_len, truncated })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Option<&[u8]> {
        let end = self.pos.checked_add(n)?;
        let s = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(s)
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn utf8(&mut self, n: usize) -> Option<Result<String>> {
        let raw = self.take(n)?;
        Some(String::from_utf8(raw.to_vec()).map_err(|_| Error::MalformedRow { row: 0, reason: "non-UTF-8 id".into() }))
    }

    /// `None` when the input ends mid-record; the cursor is left unchanged.
    fn record(&mut self, dim: usize) -> Option<Result<(String, Vec<f32>)>> {
        let start = self.pos;
        let parsed = (|| {
            let len = self.u32()? as usize;
            let id = self.utf8(len)?;
            let raw = self.take(dim.checked_mul(4)?)?;
            let values = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
            Some(id.map(|id| (id, values)))
        })();
        if parsed.is_none() {
            self.pos = start;
        }
        parsed
    }
}

fn header_bytes(provider_id: &str, dim: usize) -> Vec<u8> {
    let mut buf = Vec::with_capacity(12 + provider_id.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(dim as u32).to_le_bytes());
    buf.extend_from_slice(&(provider_id.len() as u32).to_le_bytes());
    buf.extend_from_slice(provider_id.as_bytes());
    buf
}

fn record_bytes(id: &str, values: &[f32]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(4 + id.len() + values.len() * 4);
    buf.extend_from_slice(&(id.len() as u32).to_le_bytes());
    buf.extend_from_slice(id.as_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

/// Appends records to a store file.
#[derive(Debug)]
pub struct StoreWriter {
    path: PathBuf,
    file: File,
    dim: usize,
}

impl StoreWriter {
    /// Creates (truncating) a store with just the header.
    pub fn create(path: &Path, provider_id: &str, dim: usize) -> Result<Self> {
        let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&header_bytes(provider_id, dim)).map_err(|e| Error::io(path, e))?;
        Ok(StoreWriter { path: path.to_path_buf(), file, dim })
    }

    /// Opens an existing store for appending, first cutting it back to
    /// `valid_len` bytes (see [`read_store`]).
    pub fn append_to(path: &Path, dim: usize, valid_len: u64) -> Result<Self> {
        let file = OpenOptions::new().write(true).open(path).map_err(|e| Error::io(path, e))?;
        file.set_len(valid_len).map_err(|e| Error::io(path, e))?;
        let mut w = StoreWriter { path: path.to_path_buf(), file, dim };
        use std::io::Seek;
        w.file.seek(std::io::SeekFrom::End(0)).map_err(|e| Error::io(&w.path, e))?;
        Ok(w)
    }

    pub fn append(&mut self, id: &str, values: &[f32]) -> Result<()> {
        if values.len() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, actual: values.len() });
        }
        self.file.write_all(&record_bytes(id, values)).map_err(|e| Error::io(&self.path, e))
    }

    /// Writes only the first `n` bytes of a record.  Used to simulate a crash
    /// in the middle of an append.
    #[doc(hidden)]
    pub fn append_partial(&mut self, id: &str, values: &[f32], n: usize) -> Result<()> {
        let bytes = record_bytes(id, values);
        self.file.write_all(&bytes[..n.min(bytes.len())]).map_err(|e| Error::io(&self.path, e))
    }

    pub fn sync(&mut self) -> Result<()> {
        self.file.sync_data().map_err(|e| Error::io(&self.path, e))
    }
}

/// Writes `embeddings` in id order to `path` via a temporary file and an
/// atomic rename.
pub fn store_embeddings(path: &Path, embeddings: &BTreeMap<String, Embedding>) -> Result<()> {
    let first = embeddings.values().next().ok_or(Error::EmptyInput)?;
    let (dim, pid) = (first.dim(), first.provider_id.as_str());
    for e in embeddings.values() {
        if e.dim() != dim {
            return Err(Error::DimMismatch { expected: dim, actual: e.dim() });
        }
        if e.provider_id != pid {
            return Err(Error::ProviderMismatch { bank: pid.to_string(), requested: e.provider_id.clone() });
        }
    }
    let tmp = tmp_path(path);
    {
        let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(&tmp, e);
        w.write_all(&header_bytes(pid, dim)).map_err(io)?;
        for (id, e) in embeddings {
            w.write_all(&record_bytes(id, &e.values)).map_err(io)?;
        }
        let file = w.into_inner().map_err(|e| Error::io(&tmp, e.into_error()))?;
        file.sync_all().map_err(io)?;
    }
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_embeddings(path: &Path) -> Result<BTreeMap<String, Embedding>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(read_store(&bytes, false)?.into_embeddings())
}

pub(crate) fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Serves precomputed vectors.  Texts are looked up by their content-hash id
/// (see [`content_id`]), so a store written from a question bank answers for
/// exactly those questions.
#[derive(Debug, Clone)]
pub struct StoreProvider {
    descriptor: ProviderDescriptor,
    vectors: BTreeMap<String, Embedding>,
}

impl StoreProvider {
    pub fn open(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let contents = read_store(&bytes, false)?;
        let descriptor = ProviderDescriptor {
            provider_id: contents.provider_id.clone(),
            kind: ProviderKind::Store,
            dim: contents.dim,
            languages: Lang::ALL.to_vec(),
            endpoint: None,
        };
        Ok(StoreProvider { descriptor, vectors: contents.into_embeddings() })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl EmbeddingProvider for StoreProvider {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.descriptor
    }

    fn compute(&self, texts: &[&str], lang: Lang) -> Result<Vec<Embedding>> {
        texts
            .iter()
            .map(|t| {
                let id = content_id(t, lang);
                self.vectors.get(&id).cloned().ok_or_else(|| Error::NotInStore(t.to_string()))
            })
            .collect()
    }
}
