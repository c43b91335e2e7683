use crate::error::{Error, Result};
use crate::model::Question;
use crate::prng::SplitMix64;

/// Draws `k` distinct comparison questions for every seed.
///
/// The pool is sorted by id and each seed is removed from its own candidate
/// list.  One SplitMix64 stream seeded with `rng_seed` drives a partial
/// Fisher-Yates shuffle per seed, visiting seeds in the order given, so the
/// output is a pure function of the inputs.
pub fn generate_pairs(
    seeds: &[Question],
    pool: &[Question],
    k: usize,
    rng_seed: u64,
) -> Result<Vec<(Question, Question)>> {
    let mut sorted: Vec<&Question> = pool.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    sorted.dedup_by(|a, b| a.id == b.id);

    let mut rng = SplitMix64::new(rng_seed);
    let mut out = Vec::with_capacity(seeds.len() * k);
    for seed in seeds {
        let mut candidates: Vec<&Question> = sorted.iter().copied().filter(|q| q.id != seed.id).collect();
        if k > candidates.len() {
            return Err(Error::KTooLarge { k, available: candidates.len(), seed: seed.id.clone() });
        }
        let n = candidates.len();
        for i in 0..k {
            let j = i + rng.below((n - i) as u64) as usize;
            candidates.swap(i, j);
        }
        out.extend(candidates[..k].iter().map(|c| (seed.clone(), (*c).clone())));
    }
    Ok(out)
}
