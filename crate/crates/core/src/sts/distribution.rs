use std::collections::BTreeMap;

use serde::Serialize;

use super::StsDataset;
use crate::model::{Domain, Lang, OrdinalScore};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GroupBy {
    pub domain: bool,
    pub lang: bool,
}

impl GroupBy {
    pub const NONE: GroupBy = GroupBy { domain: false, lang: false };
    pub const BOTH: GroupBy = GroupBy { domain: true, lang: true };
}

/// A distribution column.  `None` in a grouped dimension is its margin
/// ("All").
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GroupKey {
    pub domain: Option<Domain>,
    pub lang: Option<Lang>,
}

impl GroupKey {
    pub const ALL: GroupKey = GroupKey { domain: None, lang: None };
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ScoreCounts {
    /// Index `s - 1` holds the count of score `s`.
    pub counts: [u64; 4],
}

impl ScoreCounts {
    pub fn get(&self, score: OrdinalScore) -> u64 {
        self.counts[score.get() as usize - 1]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn percent(&self, score: OrdinalScore) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        100.0 * self.get(score) as f64 / total as f64
    }

    /// Percentage rounded to one decimal place.
    pub fn percent_rounded(&self, score: OrdinalScore) -> f64 {
        (self.percent(score) * 10.0).round() / 10.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionReport {
    pub total: u64,
    #[serde(serialize_with = "columns_as_list")]
    pub columns: BTreeMap<GroupKey, ScoreCounts>,
}

fn columns_as_list<S: serde::Serializer>(
    columns: &BTreeMap<GroupKey, ScoreCounts>,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Column<'a> {
        #[serde(flatten)]
        key: &'a GroupKey,
        counts: &'a ScoreCounts,
    }
    serializer.collect_seq(columns.iter().map(|(key, counts)| Column { key, counts }))
}

impl DistributionReport {
    pub fn column(&self, key: GroupKey) -> Option<&ScoreCounts> {
        self.columns.get(&key)
    }

    pub fn all(&self) -> &ScoreCounts {
        &self.columns[&GroupKey::ALL]
    }
}

/// Final-score counts per column.  Every grouped dimension also gets an "All"
/// margin; a pair's language is its seed question's language.
pub fn distribution(dataset: &StsDataset, group_by: GroupBy) -> DistributionReport {
    let mut columns: BTreeMap<GroupKey, ScoreCounts> = BTreeMap::new();
    for pair in dataset.pairs() {
        let domains: &[Option<Domain>] = if group_by.domain { &[Some(pair.domain()), None] } else { &[None] };
        let seed_lang = pair.seed().lang;
        let langs: &[Option<Lang>] = if group_by.lang { &[Some(seed_lang), None] } else { &[None] };
        for &domain in domains {
            for &lang in langs {
                columns.entry(GroupKey { domain, lang }).or_default().counts[pair.final_score.get() as usize - 1] += 1;
            }
        }
    }
    DistributionReport { total: dataset.len() as u64, columns }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Question, ScoredPair, SeedSide};
    use crate::sts::Split;

    fn dataset(scores: &[(u8, Domain)]) -> StsDataset {
        let pairs = scores
            .iter()
            .enumerate()
            .map(|(i, &(s, d))| ScoredPair {
                pair_id: format!("p{i}"),
                a: Question::new(Some(format!("a{i}")), "seed", Lang::En, d).unwrap(),
                b: Question::new(Some(format!("b{i}")), "other", Lang::En, d).unwrap(),
                score1: None,
                score2: None,
                final_score: OrdinalScore::new(s).unwrap(),
                seed_side: SeedSide::AIsSeed,
            })
            .collect();
        StsDataset::new(pairs, Split::Evaluation).unwrap()
    }

    #[test]
    fn single_pair_fills_one_cell() {
        let r = distribution(&dataset(&[(2, Domain::Sleep)]), GroupBy::NONE);
        assert_eq!(r.columns.len(), 1);
        assert_eq!(r.all().percent_rounded(OrdinalScore::new(2).unwrap()), 100.0);
    }

    #[test]
    fn margins_sum_to_total() {
        let ds = dataset(&[(1, Domain::Sleep), (4, Domain::Stress), (3, Domain::Sleep)]);
        let r = distribution(&ds, GroupBy::BOTH);
        let by_domain: u64 = r
            .columns
            .iter()
            .filter(|(k, _)| k.domain.is_some() && k.lang.is_some())
            .map(|(_, c)| c.total())
            .sum();
        assert_eq!(by_domain, 3);
        assert_eq!(r.all().total(), 3);
        let sleep = r.column(GroupKey { domain: Some(Domain::Sleep), lang: None }).unwrap();
        assert_eq!(sleep.counts, [1, 0, 1, 0]);
    }

    #[test]
    fn reordering_does_not_change_counts() {
        let fwd = dataset(&[(1, Domain::Sleep), (4, Domain::Stress), (3, Domain::Sleep)]);
        let rev = dataset(&[(3, Domain::Sleep), (4, Domain::Stress), (1, Domain::Sleep)]);
        assert_eq!(distribution(&fwd, GroupBy::BOTH), distribution(&rev, GroupBy::BOTH));
    }

    #[test]
    fn serializes_as_column_list() {
        let r = distribution(&dataset(&[(4, Domain::Sleep)]), GroupBy::NONE);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["columns"][0]["counts"]["counts"], serde_json::json!([0, 0, 0, 1]));
    }
}
