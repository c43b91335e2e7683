//! Reproducible seed/comparison pairing: the same rng seed gives the same
//! pairs on every run and platform.

use qbank::sts::generate_pairs;
use qbank::{Domain, Lang, Question};

fn main() -> qbank::Result<()> {
    let texts = [
        "How many hours do you sleep on a weeknight?",
        "Do you wake up during the night?",
        "Do you snore?",
        "How often do you take naps?",
        "Do you feel rested in the morning?",
        "Do you use your phone in bed?",
    ];
    let questions: Vec<Question> =
        texts.iter().map(|t| Question::new(None, *t, Lang::En, Domain::Sleep)).collect::<qbank::Result<_>>()?;
    let seeds = &questions[..2];

    for rng_seed in [1, 1, 2] {
        println!("rng seed {rng_seed}:");
        for (seed, other) in generate_pairs(seeds, &questions, 3, rng_seed)? {
            println!("  {:<45} <-> {}", seed.text, other.text);
        }
    }
    Ok(())
}
