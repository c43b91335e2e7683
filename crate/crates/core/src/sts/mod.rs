//! STS datasets: ingestion, validation, pair generation, score distributions
//! and annotator agreement.
//!
//! The on-disk CSV schema (UTF-8, header row, RFC-4180 quoting) is
//!
//! ```text
//! pair_id,id_a,text_a,lang_a,id_b,text_b,lang_b,domain,score1,score2,score_final,seed_side
//! ```
//!
//! `score1` / `score2` are the two annotators' scores and may be empty;
//! `seed_side` is `A` or `B`.  JSONL uses the same field names, one object per
//! line, with integer (or null) scores.

mod agreement;
mod distribution;
mod sampling;

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use agreement::{cohen_kappa, mean_kappa, Kappa};
pub use distribution::{distribution, DistributionReport, GroupBy, GroupKey, ScoreCounts};
pub use sampling::generate_pairs;

use crate::error::{Error, Result};
use crate::model::{binarize, BinaryLabel, Domain, Lang, OrdinalScore, Question, ScoredPair, SeedSide};

pub const CSV_HEADER: [&str; 12] = [
    "pair_id", "id_a", "text_a", "lang_a", "id_b", "text_b", "lang_b", "domain", "score1", "score2", "score_final",
    "seed_side",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Split {
    Evaluation,
    Finetune,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// Guesses from the file extension; anything but `.jsonl` / `.ndjson` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => Format::Jsonl,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StsDataset {
    pairs: Vec<ScoredPair>,
    split: Split,
    languages: BTreeSet<Lang>,
}

impl StsDataset {
    /// Validates and wraps a list of pairs.  Rows are numbered from 1 in errors.
    pub fn new(pairs: Vec<ScoredPair>, split: Split) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::MalformedRow { row: 0, reason: "dataset has no rows".into() });
        }
        let mut seen = HashSet::with_capacity(pairs.len());
        let mut languages = BTreeSet::new();
        for (i, p) in pairs.iter().enumerate() {
            p.validate().map_err(|reason| Error::MalformedRow { row: i + 1, reason })?;
            let key = unordered(&p.a.id, &p.b.id);
            if !seen.insert(key) {
                return Err(Error::DuplicatePair { row: i + 1, id_a: p.a.id.clone(), id_b: p.b.id.clone() });
            }
            languages.insert(p.a.lang);
            languages.insert(p.b.lang);
        }
        Ok(StsDataset { pairs, split, languages })
    }

    pub fn with_split(mut self, split: Split) -> Self {
        self.split = split;
        self
    }

    pub fn pairs(&self) -> &[ScoredPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn languages(&self) -> &BTreeSet<Lang> {
        &self.languages
    }

    /// Concatenates datasets of the same split, re-running validation.
    pub fn concat(parts: impl IntoIterator<Item = StsDataset>) -> Result<Self> {
        let mut split = None;
        let mut pairs = Vec::new();
        for part in parts {
            split.get_or_insert(part.split);
            pairs.extend(part.pairs);
        }
        StsDataset::new(pairs, split.unwrap_or(Split::Evaluation))
    }

    /// Keeps the pairs matching `keep`; `None` if nothing survives.
    pub fn filter(&self, keep: impl Fn(&ScoredPair) -> bool) -> Option<Self> {
        let pairs: Vec<_> = self.pairs.iter().filter(|p| keep(p)).cloned().collect();
        StsDataset::new(pairs, self.split).ok()
    }

    /// Unique questions in first-appearance order.
    pub fn questions(&self) -> Vec<&Question> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for p in &self.pairs {
            for q in [&p.a, &p.b] {
                if seen.insert(q.id.as_str()) {
                    out.push(q);
                }
            }
        }
        out
    }

    /// SHA-256 of the canonical CSV serialization, hex encoded.
    pub fn content_hash(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        hex::encode(Sha256::digest(&buf))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for p in &self.pairs {
            let r = RawRecord::from(p);
            w.write_record([
                r.pair_id.as_str(),
                &r.id_a,
                &r.text_a,
                &r.lang_a,
                &r.id_b,
                &r.text_b,
                &r.lang_b,
                &r.domain,
                &opt_score(r.score1),
                &opt_score(r.score2),
                &r.score_final.to_string(),
                &r.seed_side,
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> Result<()> {
        for p in &self.pairs {
            serde_json::to_writer(&mut writer, &RawRecord::from(p))?;
            writer.write_all(b"\n").map_err(|e| Error::io("<jsonl writer>", e))?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path, format: Format) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        match format {
            Format::Csv => self.write_csv(&mut w)?,
            Format::Jsonl => self.write_jsonl(&mut w)?,
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Binary label of every pair's final score, in dataset order.
pub fn binarize_dataset(dataset: &StsDataset) -> Vec<(&ScoredPair, BinaryLabel)> {
    dataset.pairs.iter().map(|p| (p, binarize(p.final_score))).collect()
}

/// Reads a dataset file.  The split defaults to [`Split::Evaluation`].
pub fn parse_dataset(path: &Path, format: Format) -> Result<StsDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        Format::Csv => parse_csv(file),
        Format::Jsonl => parse_jsonl(BufReader::new(file)),
    }
}

pub fn parse_csv<R: Read>(reader: R) -> Result<StsDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(Error::MalformedRow { row: 0, reason: "missing header".into() }),
        Some(r) => r.map_err(|e| Error::MalformedRow { row: 0, reason: e.to_string() })?,
    };
    let header: Vec<&str> = header.iter().map(str::trim).collect();
    if header != CSV_HEADER {
        return Err(Error::MalformedRow { row: 0, reason: format!("unexpected header {header:?}") });
    }
    let mut pairs = Vec::new();
    for (i, rec) in records.enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::MalformedRow { row, reason: e.to_string() })?;
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::MalformedRow {
                row,
                reason: format!("expected {} fields, found {}", CSV_HEADER.len(), rec.len()),
            });
        }
        let score = |idx: usize| -> Result<Option<i64>> {
            let s = rec[idx].trim();
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<i64>()
                .map(Some)
                .map_err(|_| Error::MalformedRow { row, reason: format!("{} is not an integer: {s:?}", CSV_HEADER[idx]) })
        };
        let raw = RawRecord {
            pair_id: rec[0].to_string(),
            id_a: rec[1].to_string(),
            text_a: rec[2].to_string(),
            lang_a: rec[3].to_string(),
            id_b: rec[4].to_string(),
            text_b: rec[5].to_string(),
            lang_b: rec[6].to_string(),
            domain: rec[7].to_string(),
            score1: score(8)?,
            score2: score(9)?,
            score_final: score(10)?
                .ok_or_else(|| Error::MalformedRow { row, reason: "score_final is required".into() })?,
            seed_side: rec[11].to_string(),
        };
        pairs.push(raw.into_pair(row)?);
    }
    StsDataset::new(pairs, Split::Evaluation)
}

pub fn parse_jsonl<R: BufRead>(reader: R) -> Result<StsDataset> {
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let row = i + 1;
        let line = line.map_err(|e| Error::MalformedRow { row, reason: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRow { row, reason: e.to_string() })?;
        pairs.push(raw.into_pair(row)?);
    }
    if pairs.is_empty() {
        return Err(Error::MalformedRow { row: 0, reason: "dataset has no rows".into() });
    }
    StsDataset::new(pairs, Split::Evaluation)
}

fn unordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

fn opt_score(s: Option<i64>) -> String {
    s.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRecord {
    pair_id: String,
    id_a: String,
    text_a: String,
    lang_a: String,
    id_b: String,
    text_b: String,
    lang_b: String,
    domain: String,
    #[serde(default)]
    score1: Option<i64>,
    #[serde(default)]
    score2: Option<i64>,
    score_final: i64,
    seed_side: String,
}

impl RawRecord {
    fn into_pair(self, row: usize) -> Result<ScoredPair> {
        let bad = |reason: String| Error::MalformedRow { row, reason };
        let score = |v: i64| -> Result<OrdinalScore> {
            u8::try_from(v)
                .ok()
                .and_then(OrdinalScore::new)
                .ok_or(Error::ScoreOutOfRange { row, value: v })
        };
        let domain: Domain = self.domain.parse().map_err(bad)?;
        let lang_a: Lang = self.lang_a.parse().map_err(bad)?;
        let lang_b: Lang = self.lang_b.parse().map_err(bad)?;
        let question = |id: String, text: String, lang: Lang| {
            let id = Some(id).filter(|s| !s.trim().is_empty());
            Question::new(id, text, lang, domain).map_err(|e| bad(e.to_string()))
        };
        let pair = ScoredPair {
            pair_id: self.pair_id,
            a: question(self.id_a, self.text_a, lang_a)?,
            b: question(self.id_b, self.text_b, lang_b)?,
            score1: self.score1.map(score).transpose()?,
            score2: self.score2.map(score).transpose()?,
            final_score: score(self.score_final)?,
            seed_side: self.seed_side.parse::<SeedSide>().map_err(bad)?,
        };
        if pair.a.id == pair.b.id {
            return Err(bad(format!("pair compares question {} with itself", pair.a.id)));
        }
        Ok(pair)
    }
}

impl From<&ScoredPair> for RawRecord {
    fn from(p: &ScoredPair) -> Self {
        RawRecord {
            pair_id: p.pair_id.clone(),
            id_a: p.a.id.clone(),
            text_a: p.a.text.clone(),
            lang_a: p.a.lang.code().into(),
            id_b: p.b.id.clone(),
            text_b: p.b.text.clone(),
            lang_b: p.b.lang.code().into(),
            domain: p.domain().code().into(),
            score1: p.score1.map(|s| s.get() as i64),
            score2: p.score2.map(|s| s.get() as i64),
            score_final: p.final_score.get() as i64,
            seed_side: p.seed_side.code().into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "pair_id,id_a,text_a,lang_a,id_b,text_b,lang_b,domain,score1,score2,score_final,seed_side\n";

    #[test]
    fn empty_file_is_malformed_at_header() {
        let err = parse_csv("".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::MalformedRow { row: 0, .. }), "{err:?}");
    }

    #[test]
    fn header_only_is_rejected() {
        assert!(matches!(parse_csv(HEADER.as_bytes()), Err(Error::MalformedRow { row: 0, .. })));
    }

    #[test]
    fn score_five_is_out_of_range() {
        let data = format!("{HEADER}p1,a,Do you nap?,en,b,Do you sleep?,en,SLEEP,,,5,A\n");
        assert!(matches!(parse_csv(data.as_bytes()), Err(Error::ScoreOutOfRange { row: 1, value: 5 })));
    }

    #[test]
    fn duplicate_unordered_pair_is_rejected() {
        let data = format!(
            "{HEADER}p1,a,Do you nap?,en,b,Do you sleep?,en,SLEEP,,,3,A\np2,b,Do you sleep?,en,a,Do you nap?,en,SLEEP,,,3,B\n"
        );
        assert!(matches!(parse_csv(data.as_bytes()), Err(Error::DuplicatePair { row: 2, .. })));
    }

    #[test]
    fn wrong_field_count_names_the_row() {
        let data = format!("{HEADER}p1,a,Do you nap?,en,b,Do you sleep?,en,SLEEP,,,3,A\np2,only,three\n");
        assert!(matches!(parse_csv(data.as_bytes()), Err(Error::MalformedRow { row: 2, .. })));
    }

    #[test]
    fn inconsistent_final_score_is_malformed() {
        let data = format!("{HEADER}p1,a,Do you nap?,en,b,Do you sleep?,en,SLEEP,2,2,4,A\n");
        assert!(matches!(parse_csv(data.as_bytes()), Err(Error::MalformedRow { row: 1, .. })));
    }

    #[test]
    fn quoted_fields_and_missing_ids() {
        let data = format!("{HEADER}p1,,\"Hello, \"\"world\"\"?\",en,,Other text,ko,DL,1,2,2,B\n");
        let ds = parse_csv(data.as_bytes()).unwrap();
        let p = &ds.pairs()[0];
        assert_eq!(p.a.text, "Hello, \"world\"?");
        assert_eq!(p.a.id, crate::model::content_id("Hello, \"world\"?", Lang::En));
        assert_eq!(p.seed().lang, Lang::Ko);
        assert_eq!(p.pairing(), "KO-EN");
        assert_eq!(ds.languages().len(), 2);
    }

    #[test]
    fn jsonl_matches_csv() {
        let data = format!("{HEADER}p1,a,Do you nap?,en,b,Do you sleep?,en,SLEEP,3,4,4,A\n");
        let ds = parse_csv(data.as_bytes()).unwrap();
        let mut buf = Vec::new();
        ds.write_jsonl(&mut buf).unwrap();
        let back = parse_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn binarize_all_ones() {
        let data = format!(
            "{HEADER}p1,a,x,en,b,y,en,PA,,,1,A\np2,a,x,en,c,z,en,PA,,,1,A\n"
        );
        let ds = parse_csv(data.as_bytes()).unwrap();
        assert!(binarize_dataset(&ds).iter().all(|(_, l)| *l == BinaryLabel::Dissimilar));
    }
}
