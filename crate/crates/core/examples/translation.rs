//! English-only providers compare Korean questions through a translator.

use qbank::bow::build_vocabulary;
use qbank::harness::english_corpus;
use qbank::providers::{BowProvider, FixtureTranslator, Translator};
use qbank::simeng::pairwise_scores;
use qbank::sts::{parse_dataset, Format};
use qbank::Lang;

fn main() -> qbank::Result<()> {
    let tr = FixtureTranslator::shipped();
    let ko = "억제할 수 없이 폭식을 한 적이 있다.";
    println!("{ko} -> {}", tr.translate(ko, Lang::Ko, Lang::En)?);

    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/supplement_b_ko_en_dl.csv");
    let ds = parse_dataset(&path, Format::Csv)?;
    let vocab = build_vocabulary(&english_corpus(&ds, Some(tr))?)?;
    let p = BowProvider::new(vocab)?;
    let pairs: Vec<_> = ds.pairs().iter().map(|q| (q.a.text.as_str(), q.a.lang, q.b.text.as_str(), q.b.lang)).collect();
    for (q, s) in ds.pairs().iter().zip(pairwise_scores(&pairs, &p, Some(tr))?) {
        println!("{:.3}  score {}  {}", s.get(), q.final_score.get(), q.comparison().text);
    }
    Ok(())
}
