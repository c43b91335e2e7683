mod common;

use common::{load, B1_PARAPHRASE, B1_SEED, B1_YOGA};
use qbank::bow::build_vocabulary;
use qbank::providers::{BowProvider, EmbeddingProvider};
use qbank::simeng::pairwise_scores;
use qbank::Lang;
use proptest::prelude::*;

fn b1_provider() -> BowProvider {
    let ds = load("supplement_b_en_pa.csv");
    let corpus: Vec<&str> = ds.questions().iter().map(|q| q.text.as_str()).collect();
    BowProvider::new(build_vocabulary(&corpus).unwrap()).unwrap()
}

#[test]
fn paraphrase_beats_yoga() {
    let p = b1_provider();
    let s = pairwise_scores(
        &[(B1_SEED, Lang::En, B1_PARAPHRASE, Lang::En), (B1_SEED, Lang::En, B1_YOGA, Lang::En)],
        &p,
        None,
    )
    .unwrap();
    assert!(s[0].get() > s[1].get(), "{} vs {}", s[0].get(), s[1].get());
}

#[test]
fn similar_rows_outscore_dissimilar_on_average() {
    let ds = load("supplement_b_en_pa.csv");
    let p = b1_provider();
    let pairs: Vec<_> = ds.pairs().iter().map(|q| (q.a.text.as_str(), q.a.lang, q.b.text.as_str(), q.b.lang)).collect();
    let s = pairwise_scores(&pairs, &p, None).unwrap();
    let mean = |sim: bool| {
        let v: Vec<f64> = ds.pairs().iter().zip(&s).filter(|(q, _)| q.label().is_similar() == sim).map(|(_, c)| c.get()).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    assert!(mean(true) > mean(false));
}

proptest! {
    #[test]
    fn bow_vectors_are_unit_or_flagged_zero(text in "[a-zA-Z ,.?]{0,80}") {
        let p = b1_provider();
        let e = p.embed_one(&text, Lang::En).unwrap();
        prop_assert!(e.is_zero() || (e.norm() - 1.0).abs() <= 1e-6);
    }
}
