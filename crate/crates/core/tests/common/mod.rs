#![allow(dead_code)]

use std::path::PathBuf;

use qbank::sts::{parse_dataset, Format, StsDataset};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load(name: &str) -> StsDataset {
    parse_dataset(&fixture(name), Format::Csv).unwrap()
}

pub const B1_SEED: &str = "In the past month, have you ever had chest pain when you were not performing any physical activity?";
pub const B1_PARAPHRASE: &str = "In the past month, have you had chest pain when you were not doing physical activity?";
pub const B1_YOGA: &str = "Have you done yoga or Tai-chi in the past 4 weeks?";

use qbank::prng::SplitMix64;
use qbank::providers::Embedding;
use qbank::simeng::BankSnapshot;
use qbank::{Domain, Lang, Question};

pub const PROVIDER: &str = "test-bank";

/// Integer-valued components in [-2, 2] so that equal similarities are common,
/// with every fourth row a copy of an earlier one.  Ids are assigned out of
/// insertion order.
pub fn random_vectors(rng: &mut SplitMix64, n: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    while rows.len() < n {
        if rows.len() % 4 == 3 {
            let j = rng.below(rows.len() as u64) as usize;
            rows.push(rows[j].clone());
            continue;
        }
        let v: Vec<f64> = (0..dim).map(|_| rng.below(5) as f64 - 2.0).collect();
        if v.iter().any(|&x| x != 0.0) {
            rows.push(v);
        }
    }
    rows
}

pub fn embedding(v: &[f64]) -> Embedding {
    Embedding::from_raw(v, PROVIDER, PROVIDER).unwrap()
}

pub fn random_bank(rng: &mut SplitMix64, n: usize, dim: usize) -> BankSnapshot {
    let rows = random_vectors(rng, n, dim);
    let mut ids: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        ids.swap(i, rng.below(i as u64 + 1) as usize);
    }
    let entries = rows.iter().zip(&ids).map(|(v, &id)| {
        let q = Question::new(Some(format!("q{id:05}")), format!("question {id}"), Lang::En, Domain::Sleep).unwrap();
        (q, embedding(v))
    });
    BankSnapshot::new(PROVIDER, dim, 1, entries).unwrap()
}

/// Sort-everything reference: plain f64 dot products, clamped, ordered by
/// (similarity desc, id asc).
pub fn naive_top_k(bank: &BankSnapshot, query: &[f32], k: usize) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = (0..bank.len())
        .map(|i| {
            let mut s = 0.0f64;
            for (a, b) in bank.row(i).iter().zip(query) {
                s += *a as f64 * *b as f64;
            }
            (bank.question(i).id.clone(), s.clamp(-1.0, 1.0) + 0.0)
        })
        .collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

pub fn fast_top_k(bank: &BankSnapshot, query: &Embedding, k: usize) -> Vec<(String, f64)> {
    bank.top_k(query, k, |_| 0.5)
        .unwrap()
        .into_iter()
        .map(|m| (m.question_id, m.similarity.get()))
        .collect()
}
