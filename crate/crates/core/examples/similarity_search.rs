//! Exact top-k search over an in-memory bank, labelled with per-domain cutoffs.

use std::time::Instant;

use qbank::metrics::ThresholdProfile;
use qbank::providers::{EmbeddingProvider, TestProvider};
use qbank::simeng::BankSnapshot;
use qbank::{Domain, Lang, Question};

fn main() -> qbank::Result<()> {
    let p = TestProvider::new(768)?;
    let texts: Vec<String> = (0..1835).map(|i| format!("survey question number {i}")).collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let entries: Vec<_> = texts
        .iter()
        .zip(p.embed(&refs, Lang::En)?)
        .enumerate()
        .map(|(i, (t, e))| Ok((Question::new(None, t, Lang::En, Domain::LIFELOG[i % 5])?, e)))
        .collect::<qbank::Result<_>>()?;
    let bank = BankSnapshot::new(p.descriptor().provider_id.clone(), 768, 1, entries)?;

    let profile = ThresholdProfile::fixed(0.6).with_domain(Domain::Sleep, 0.3);
    let query = p.embed_one("survey question number 42", Lang::En)?;
    let start = Instant::now();
    let top = bank.top_k(&query, 5, |q| profile.cutoff_for(q.domain))?;
    let took = start.elapsed();
    for m in &top {
        let q = bank.get(&m.question_id).expect("hit is in the bank");
        println!("#{} {:.4} {:?} {:<6} {}", m.rank, m.similarity.get(), m.label, q.domain.to_string(), q.text);
    }
    println!("scanned {} x {} in {took:?}", bank.len(), bank.dim());
    Ok(())
}
