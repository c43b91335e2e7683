use std::collections::HashMap;

use crate::error::{Error, Result};

/// Rule cascade: exception lexicon first, then suffix rules for plain ASCII
/// words.  Tokens with digits or non-Latin letters pass through unchanged.
#[derive(Debug, Clone, Default)]
pub struct Lemmatizer {
    exceptions: HashMap<String, String>,
}

impl Lemmatizer {
    pub fn from_tsv(source: &str) -> Result<Self> {
        let mut exceptions = HashMap::new();
        for (i, line) in source.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (surface, lemma) = line.split_once('\t').ok_or_else(|| Error::MalformedRow {
                row: i + 1,
                reason: "lemma exception needs surface<TAB>lemma".into(),
            })?;
            exceptions.insert(surface.trim().to_lowercase(), lemma.trim().to_lowercase());
        }
        Ok(Lemmatizer { exceptions })
    }

    pub fn lemmatize(&self, token: &str) -> String {
        if let Some(lemma) = self.exceptions.get(token) {
            return lemma.clone();
        }
        if !token.bytes().all(|b| b.is_ascii_lowercase()) {
            return token.to_string();
        }
        suffix_rules(token)
    }
}

fn suffix_rules(tok: &str) -> String {
    let n = tok.len();
    if n > 4 && (tok.ends_with("ies") || tok.ends_with("ied")) {
        return format!("{}y", &tok[..n - 3]);
    }
    if tok.ends_with("ss") || tok.ends_with("us") || tok.ends_with("is") {
        return tok.to_string();
    }
    if n > 4 && tok.ends_with("es") {
        let stem = &tok[..n - 2];
        return if ["s", "x", "z", "ch", "sh"].iter().any(|s| stem.ends_with(s)) {
            stem.to_string()
        } else {
            tok[..n - 1].to_string()
        };
    }
    if n > 3 && tok.ends_with('s') {
        return tok[..n - 1].to_string();
    }
    if n > 5 && tok.ends_with("ing") {
        return repair(&tok[..n - 3]);
    }
    if n > 4 && tok.ends_with("ed") {
        return repair(&tok[..n - 2]);
    }
    tok.to_string()
}

fn is_vowel(b: u8) -> bool {
    matches!(b, b'a' | b'e' | b'i' | b'o' | b'u')
}

/// Undoubles a final consonant (`stopp` -> `stop`) or restores a silent `e`
/// after endings that cannot close an English word (`relat`, `liv`, `notic`).
fn repair(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 2 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        return stem[..n - 1].to_string();
    }
    if ["at", "bl", "iz", "v", "c", "u"].iter().any(|s| stem.ends_with(s)) {
        return format!("{stem}e");
    }
    stem.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lem(t: &str) -> String {
        Lemmatizer::from_tsv("eaten\teat\nfelt\tfeel\n").unwrap().lemmatize(t)
    }

    #[test]
    fn lexicon_wins() {
        assert_eq!(lem("eaten"), "eat");
        assert_eq!(lem("felt"), "feel");
    }

    #[test]
    fn plural_rules() {
        assert_eq!(lem("weeks"), "week");
        assert_eq!(lem("activities"), "activity");
        assert_eq!(lem("boxes"), "box");
        assert_eq!(lem("watches"), "watch");
        assert_eq!(lem("changes"), "change");
        assert_eq!(lem("classes"), "class");
        assert_eq!(lem("stress"), "stress");
        assert_eq!(lem("status"), "status");
        assert_eq!(lem("gas"), "gas");
    }

    #[test]
    fn verb_rules() {
        assert_eq!(lem("sleeping"), "sleep");
        assert_eq!(lem("running"), "run");
        assert_eq!(lem("stopped"), "stop");
        assert_eq!(lem("falling"), "fall");
        assert_eq!(lem("related"), "relate");
        assert_eq!(lem("continued"), "continue");
        assert_eq!(lem("worried"), "worry");
        assert_eq!(lem("performing"), "perform");
    }

    #[test]
    fn non_ascii_passthrough() {
        assert_eq!(lem("소음"), "소음");
        assert_eq!(lem("4"), "4");
        assert_eq!(lem("covid19s"), "covid19s");
    }

    #[test]
    fn bad_lexicon_line() {
        assert!(Lemmatizer::from_tsv("no tab here\n").is_err());
    }

    #[test]
    fn shipped_lexicon_entries() {
        let l = Lemmatizer::from_tsv(include_str!("../../data/lemma_exceptions.tsv")).unwrap();
        assert!(l.exceptions.len() >= 200);
        assert_eq!(l.lemmatize("said"), "say");
        assert_eq!(l.lemmatize("exercising"), "exercise");
    }
}
