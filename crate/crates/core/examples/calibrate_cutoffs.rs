//! Fit global and per-domain cutoffs from labelled similarity scores.

use qbank::harness::bow_provider_for;
use qbank::metrics::{calibrate_profiles, optimal_cutoff, Objective};
use qbank::providers::FixtureTranslator;
use qbank::simeng::pairwise_scores;
use qbank::sts::{parse_dataset, Format};
use qbank::BinaryLabel::{Dissimilar as D, Similar as S};

fn main() -> qbank::Result<()> {
    let scores = [0.91, 0.85, 0.72, 0.64, 0.55, 0.41, 0.30];
    let truth = [S, S, S, D, S, D, D];
    for objective in [Objective::YoudenJ, Objective::MaxF1] {
        println!("{objective:?}: cutoff {:.3}", optimal_cutoff(&scores, &truth, objective)?);
    }

    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/supplement_b_all.csv");
    let ds = parse_dataset(&path, Format::Csv)?;
    let tr = FixtureTranslator::shipped();
    let p = bow_provider_for(&ds, Some(tr))?;
    let texts: Vec<_> = ds.pairs().iter().map(|q| (q.a.text.as_str(), q.a.lang, q.b.text.as_str(), q.b.lang)).collect();
    let cos = pairwise_scores(&texts, &p, Some(tr))?;
    let samples: Vec<_> = ds.pairs().iter().zip(&cos).map(|(q, c)| (q.domain(), c.get(), q.label())).collect();
    let cal = calibrate_profiles(&samples, Objective::YoudenJ, &ds.content_hash())?;
    for w in &cal.warnings {
        println!("warning: {w}");
    }
    println!("{}", cal.profile().to_json()?);
    Ok(())
}
