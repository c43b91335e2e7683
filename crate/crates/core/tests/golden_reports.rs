//! Golden values come from `tests/oracle/stratum_metrics.py`, which recomputes
//! every stratum from the per-pair cosines with scikit-learn.

mod common;

use common::load;
use qbank::harness::{bow_provider_for, evaluate, ProfileChoice};
use qbank::metrics::Objective;
use qbank::providers::FixtureTranslator;
use serde_json::Value;

#[test]
fn supplement_b_bow_matches_oracle() {
    let ds = load("supplement_b_all.csv");
    let tr = FixtureTranslator::shipped();
    let provider = bow_provider_for(&ds, Some(tr)).unwrap();
    let report = evaluate(&ds, &provider, Some(tr), &ProfileChoice::Auto(Objective::YoudenJ)).unwrap();

    let golden: Value =
        serde_json::from_str(include_str!("golden/supplement_b_bow.json")).unwrap();
    assert_eq!(golden["provider_id"], report.config.provider_id.as_str());
    for s in &report.scores {
        let g = golden["scores"][&s.pair_id].as_f64().unwrap();
        assert!((g - s.similarity).abs() <= 1e-12, "{}: {} vs {g}", s.pair_id, s.similarity);
    }

    let rows = golden["rows"].as_array().unwrap();
    assert_eq!(rows.len(), report.rows.len());
    let domains: Vec<_> = report.rows.iter().filter(|r| r.domain != "ALL").collect();
    assert_eq!(domains.len(), 4);
    for g in rows {
        let r = report.row(g["pairing"].as_str().unwrap(), g["domain"].as_str().unwrap()).unwrap();
        assert_eq!(g["n"].as_u64().unwrap() as usize, r.n);
        let close = |key: &str, v: Option<f64>| match (g[key].as_f64(), v) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-9, "{}/{} {key}: {b} vs {a}", r.pairing, r.domain),
            (a, b) => assert_eq!(a, b, "{key}"),
        };
        close("cutoff", Some(r.cutoff));
        close("accuracy", Some(r.accuracy));
        close("precision", Some(r.precision));
        close("recall", Some(r.recall));
        close("f1", Some(r.f1));
        close("roc_auc", r.roc_auc);
        close("pr_auc", r.pr_auc);
    }
}

#[test]
fn report_is_byte_deterministic() {
    let ds = load("supplement_b_all.csv");
    let tr = FixtureTranslator::shipped();
    let run = || {
        let p = bow_provider_for(&ds, Some(tr)).unwrap();
        evaluate(&ds, &p, Some(tr), &ProfileChoice::Auto(Objective::YoudenJ)).unwrap().to_json().unwrap()
    };
    assert_eq!(run(), run());
}
