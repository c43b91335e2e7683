//! Parse an STS file and print its score distribution and label balance.
//!
//!     cargo run --example dataset_summary [path.csv]

use std::path::PathBuf;

use qbank::sts::{binarize_dataset, distribution, parse_dataset, Format, GroupBy};
use qbank::OrdinalScore;

fn main() -> qbank::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/evaluation_shape.csv"));
    let ds = parse_dataset(&path, Format::from_path(&path))?;
    println!("{}: {} pairs, {} distinct questions, hash {}", path.display(), ds.len(), ds.questions().len(), &ds.content_hash()[..12]);

    let dist = distribution(&ds, GroupBy { domain: true, lang: false });
    println!("{:<8} {:>6} {:>6} {:>6} {:>6} {:>5}", "domain", "4", "3", "2", "1", "n");
    for (key, counts) in &dist.columns {
        let name = key.domain.map_or("All".to_string(), |d| d.to_string());
        let pct: Vec<String> =
            [4, 3, 2, 1].iter().map(|&s| format!("{:>5.1}%", counts.percent(OrdinalScore::new(s).unwrap()))).collect();
        println!("{name:<8} {} {:>5}", pct.join(" "), counts.total());
    }

    let similar = binarize_dataset(&ds).iter().filter(|(_, l)| l.is_similar()).count();
    println!("SIMILAR {similar} / DISSIMILAR {}", ds.len() - similar);
    Ok(())
}
