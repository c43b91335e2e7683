//! Tokenize, lemmatize and vectorize English questions, then compare them by
//! cosine over term counts.

use qbank::bow::{build_vocabulary, vectorize, Pipeline};
use qbank::providers::{BowProvider, EmbeddingProvider};
use qbank::simeng::cosine;
use qbank::Lang;

fn main() -> qbank::Result<()> {
    let seed = "In the past month, have you ever had chest pain when you were not performing any physical activity?";
    let others = [
        "In the past month, have you had chest pain when you were not doing physical activity?",
        "Do you feel pain in your chest when you do physical activity?",
        "Have you done yoga or Tai-chi in the past 4 weeks?",
    ];
    let mut corpus = vec![seed];
    corpus.extend(others);

    println!("lemmas: {:?}", Pipeline::shipped().lemmas(seed));
    let vocab = build_vocabulary(&corpus)?;
    println!("vocabulary: {} terms, version {}", vocab.dim(), &vocab.version()[..12]);
    println!("counts: {:?}", vectorize(others[0], &vocab).to_dense());

    let p = BowProvider::new(vocab)?;
    let s = p.embed_one(seed, Lang::En)?;
    for o in others {
        let c = cosine(&s, &p.embed_one(o, Lang::En)?)?;
        println!("{:.4}  {o}", c.get());
    }
    Ok(())
}
