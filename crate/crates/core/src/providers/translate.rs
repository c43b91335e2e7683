//! Translation hook for providers that only read English.
//!
//! The external translator speaks a small JSON protocol:
//! `POST {endpoint}/translate` with `{"text", "source", "target"}` returns
//! `{"text"}`.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Lang;

pub trait Translator: Send + Sync {
    fn translate(&self, text: &str, source: Lang, target: Lang) -> Result<String>;
}

impl<T: Translator + ?Sized> Translator for std::sync::Arc<T> {
    fn translate(&self, text: &str, source: Lang, target: Lang) -> Result<String> {
        (**self).translate(text, source, target)
    }
}

/// Exact-match lookup over a Korean/English table.  Same-language requests are
/// the identity; everything else misses with [`Error::NoTranslation`].
#[derive(Debug, Clone, Default)]
pub struct FixtureTranslator {
    ko_en: HashMap<String, String>,
    en_ko: HashMap<String, String>,
}

const SHIPPED: &str = include_str!("../../data/translations_fixture.tsv");

impl FixtureTranslator {
    /// Table shipped with the crate, covering the bundled Korean fixtures.
    pub fn shipped() -> &'static FixtureTranslator {
        static CELL: OnceLock<FixtureTranslator> = OnceLock::new();
        CELL.get_or_init(|| FixtureTranslator::from_tsv(SHIPPED).expect("shipped translation table is valid"))
    }

    /// Parses `ko_text<TAB>en_text` lines; blank lines and `#` comments are skipped.
    pub fn from_tsv(source: &str) -> Result<Self> {
        let mut t = FixtureTranslator::default();
        for (i, line) in source.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (ko, en) = line.split_once('\t').ok_or_else(|| Error::MalformedRow {
                row: i + 1,
                reason: "expected ko_text<TAB>en_text".into(),
            })?;
            t.ko_en.insert(ko.trim().to_string(), en.trim().to_string());
            t.en_ko.entry(en.trim().to_string()).or_insert_with(|| ko.trim().to_string());
        }
        Ok(t)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        FixtureTranslator::from_tsv(&text)
    }

    pub fn len(&self) -> usize {
        self.ko_en.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ko_en.is_empty()
    }
}

impl Translator for FixtureTranslator {
    fn translate(&self, text: &str, source: Lang, target: Lang) -> Result<String> {
        let table = match (source, target) {
            (s, t) if s == t => return Ok(text.to_string()),
            (Lang::Ko, Lang::En) => &self.ko_en,
            (Lang::En, Lang::Ko) => &self.en_ko,
            _ => unreachable!(),
        };
        table.get(text.trim()).cloned().ok_or_else(|| Error::NoTranslation(text.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateRequest {
    pub text: String,
    pub source: Lang,
    pub target: Lang,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateResponse {
    pub text: String,
}

/// Delegates to an HTTP translation service.
#[derive(Debug, Clone)]
pub struct ExternalTranslator {
    endpoint: String,
    agent: ureq::Agent,
}

impl ExternalTranslator {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder().timeout_global(Some(timeout)).build().into();
        ExternalTranslator { endpoint: endpoint.into().trim_end_matches('/').to_string(), agent }
    }
}

impl Translator for ExternalTranslator {
    fn translate(&self, text: &str, source: Lang, target: Lang) -> Result<String> {
        if source == target {
            return Ok(text.to_string());
        }
        let url = format!("{}/translate", self.endpoint);
        let body = TranslateRequest { text: text.to_string(), source, target };
        let resp: TranslateResponse = self
            .agent
            .post(&url)
            .send_json(&body)
            .and_then(|mut r| r.body_mut().read_json())
            .map_err(|e| Error::TranslatorUnreachable(format!("{url}: {e}")))?;
        Ok(resp.text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binge_eating_seed() {
        let t = FixtureTranslator::shipped();
        assert_eq!(
            t.translate("억제할 수 없이 폭식을 한 적이 있다.", Lang::Ko, Lang::En).unwrap(),
            "I have been binge eating without suppressing"
        );
        assert_eq!(
            t.translate("I have been binge eating without suppressing", Lang::En, Lang::Ko).unwrap(),
            "억제할 수 없이 폭식을 한 적이 있다."
        );
    }

    #[test]
    fn identity_and_miss() {
        let t = FixtureTranslator::shipped();
        assert_eq!(t.translate("anything at all", Lang::En, Lang::En).unwrap(), "anything at all");
        assert!(matches!(t.translate("없는 문장", Lang::Ko, Lang::En), Err(Error::NoTranslation(_))));
    }

    #[test]
    fn malformed_table() {
        assert!(FixtureTranslator::from_tsv("no tab here").is_err());
        assert_eq!(FixtureTranslator::from_tsv("# c\n\n가\tA\n").unwrap().len(), 1);
    }

    #[test]
    fn unreachable_translator() {
        let t = ExternalTranslator::new("http://127.0.0.1:9", Duration::from_millis(500));
        assert!(matches!(t.translate("가", Lang::Ko, Lang::En), Err(Error::TranslatorUnreachable(_))));
    }
}
