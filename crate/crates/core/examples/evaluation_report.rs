//! Evaluate the bag-of-words baseline per language pairing and domain, and
//! write JSON and CSV reports.

use qbank::harness::{bow_provider_for, emit_report, evaluate, ProfileChoice, ReportFormat};
use qbank::metrics::Objective;
use qbank::providers::FixtureTranslator;
use qbank::sts::{parse_dataset, Format};

fn main() -> qbank::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/supplement_b_all.csv");
    let ds = parse_dataset(&path, Format::Csv)?;
    let tr = FixtureTranslator::shipped();
    let p = bow_provider_for(&ds, Some(tr))?;
    let report = evaluate(&ds, &p, Some(tr), &ProfileChoice::Auto(Objective::YoudenJ))?;

    println!("{:<6} {:<7} {:>3} {:>6} {:>6} {:>6} {:>7}", "pair", "domain", "n", "f1", "roc", "pr", "cutoff");
    for r in &report.rows {
        let auc = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
        println!(
            "{:<6} {:<7} {:>3} {:>6.3} {:>6} {:>6} {:>7.3}",
            r.pairing, r.domain, r.n, r.f1, auc(r.roc_auc), auc(r.pr_auc), r.cutoff
        );
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }

    let dir = std::env::temp_dir().join(format!("qbank-report-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| qbank::Error::io(&dir, e))?;
    for name in ["report.json", "report.csv"] {
        let out = dir.join(name);
        emit_report(&report, ReportFormat::from_path(&out), &out)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}
