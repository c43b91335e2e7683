//! Cohen's kappa between two annotators, per domain and averaged.

use qbank::sts::{cohen_kappa, mean_kappa};
use qbank::BinaryLabel::{Dissimilar as D, Similar as S};

fn main() -> qbank::Result<()> {
    let strata = [
        ("DL", vec![S, S, D, D, S, D, D, D], vec![S, S, D, D, S, D, S, D]),
        ("SLEEP", vec![S, D, D, D, S, S, D, D], vec![S, D, D, D, S, S, D, D]),
        ("STRESS", vec![S, S, D, D], vec![S, D, D, D]),
    ];
    let mut kappas = Vec::new();
    for (domain, a, b) in &strata {
        let k = cohen_kappa(a, b)?;
        println!("{domain:<7} kappa {:.3} (observed {:.3}, chance {:.3})", k.kappa, k.observed, k.expected);
        kappas.push(k.kappa);
    }
    println!("mean    kappa {:.2}", mean_kappa(&kappas)?);

    // Ordinal 1-4 scores work too; any Ord label type does.
    let k = cohen_kappa(&[4u8, 3, 1, 2, 2], &[4u8, 3, 2, 2, 1])?;
    println!("ordinal kappa {:.3}", k.kappa);
    Ok(())
}
