//! Cosine kernels, pairwise scoring and exact top-k search.

mod bank;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use bank::{BankSnapshot, Hit, PublishedBank, RankedMatch};

use crate::error::{Error, Result};
use crate::model::{BinaryLabel, Lang, SimilarityValue};
use crate::providers::{Embedding, EmbeddingProvider, Translator};

/// Dot product with `f64` accumulation, summed left to right.
///
/// Each `f32 * f32` product is exact in `f64`, so the result depends only on
/// the summation order, which is fixed.
pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    let mut acc = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        acc += x as f64 * y as f64;
    }
    acc
}

/// A cosine score.  `degenerate` marks that one side was a zero vector, in
/// which case the value is 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cosine {
    pub value: SimilarityValue,
    pub degenerate: bool,
}

impl Cosine {
    /// A non-degenerate score, clamped into `[-1, 1]`.
    pub fn new(value: f64) -> Self {
        Cosine { value: clamp_score(value), degenerate: false }
    }

    pub fn get(self) -> f64 {
        self.value.get()
    }
}

pub(crate) fn clamp_score(raw: f64) -> SimilarityValue {
    // `+ 0.0` folds -0.0 into 0.0 so equal scores compare equal everywhere.
    SimilarityValue::new(raw + 0.0)
}

/// Cosine of two provider embeddings.  Both are unit-norm (or flagged zero),
/// so this is the clamped dot product.
pub fn cosine(a: &Embedding, b: &Embedding) -> Result<Cosine> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch { expected: a.dim(), actual: b.dim() });
    }
    if a.is_zero() || b.is_zero() {
        return Ok(Cosine { value: SimilarityValue::new(0.0), degenerate: true });
    }
    let raw = if a.normalized && b.normalized {
        dot(&a.values, &b.values)
    } else {
        dot(&a.values, &b.values) / (a.norm() * b.norm())
    };
    Ok(Cosine { value: clamp_score(raw), degenerate: false })
}

/// `score >= threshold` is SIMILAR.
pub fn classify(score: SimilarityValue, threshold: f64) -> BinaryLabel {
    if score.get() >= threshold {
        BinaryLabel::Similar
    } else {
        BinaryLabel::Dissimilar
    }
}

/// One pair to score: `(text_a, lang_a, text_b, lang_b)`.
pub type TextPair<'a> = (&'a str, Lang, &'a str, Lang);

/// Scores each pair in order.
///
/// Every distinct `(text, lang)` is embedded once, in one batch per language.
/// Text in a language the provider does not read is first translated into one
/// it does (English preferred) when a translator is given.  Errors carry the
/// index of the first pair they affect.
pub fn pairwise_scores(
    pairs: &[TextPair<'_>],
    provider: &dyn EmbeddingProvider,
    translator: Option<&dyn Translator>,
) -> Result<Vec<Cosine>> {
    let desc = provider.descriptor();
    let target = if desc.supports(Lang::En) { Lang::En } else { desc.languages.first().copied().unwrap_or(Lang::En) };

    // Resolve every side to the text actually embedded.
    let mut resolved: HashMap<(&str, Lang), (String, Lang)> = HashMap::new();
    for (i, &(ta, la, tb, lb)) in pairs.iter().enumerate() {
        for (text, lang) in [(ta, la), (tb, lb)] {
            if resolved.contains_key(&(text, lang)) {
                continue;
            }
            let r = if desc.supports(lang) {
                (text.to_string(), lang)
            } else {
                match translator {
                    Some(t) => (t.translate(text, lang, target).map_err(|e| Error::at_pair(i, e))?, target),
                    None => {
                        let e = Error::UnsupportedLanguage { provider: desc.provider_id.clone(), lang: lang.code().into() };
                        return Err(Error::at_pair(i, e));
                    }
                }
            };
            resolved.insert((text, lang), r);
        }
    }

    // One batch of unique texts per language, in first-seen order.
    let mut batches: Vec<(Lang, Vec<&str>)> = Vec::new();
    let mut slot: HashMap<(&str, Lang), (usize, usize)> = HashMap::new();
    let mut first_pair: HashMap<Lang, usize> = HashMap::new();
    for (i, &(ta, la, tb, lb)) in pairs.iter().enumerate() {
        for key in [(ta, la), (tb, lb)] {
            let (text, lang) = &resolved[&key];
            first_pair.entry(*lang).or_insert(i);
            if slot.contains_key(&(text.as_str(), *lang)) {
                continue;
            }
            let b = match batches.iter().position(|(l, _)| l == lang) {
                Some(b) => b,
                None => {
                    batches.push((*lang, Vec::new()));
                    batches.len() - 1
                }
            };
            slot.insert((text.as_str(), *lang), (b, batches[b].1.len()));
            batches[b].1.push(text.as_str());
        }
    }

    let mut vectors: Vec<Vec<Embedding>> = Vec::with_capacity(batches.len());
    for (lang, texts) in &batches {
        let out = provider.embed(texts, *lang).map_err(|e| {
            let index = match &e {
                Error::NotInStore(t) => pairs.iter().position(|p| p.0 == t || p.2 == t),
                _ => None,
            };
            Error::at_pair(index.unwrap_or(first_pair[lang]), e)
        })?;
        vectors.push(out);
    }

    let lookup = |key: (&str, Lang)| {
        let (text, lang) = &resolved[&key];
        let (b, j) = slot[&(text.as_str(), *lang)];
        &vectors[b][j]
    };
    pairs
        .iter()
        .enumerate()
        .map(|(i, &(ta, la, tb, lb))| cosine(lookup((ta, la)), lookup((tb, lb))).map_err(|e| Error::at_pair(i, e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bow::build_vocabulary;
    use crate::providers::{BowProvider, FixtureTranslator, TestProvider};
    use proptest::prelude::*;

    fn unit(v: &[f64]) -> Embedding {
        Embedding::from_raw(v, "t", "t").unwrap()
    }

    #[test]
    fn hand_cosines() {
        let e1 = unit(&[1.0, 0.0]);
        assert_eq!(cosine(&e1, &e1).unwrap().get(), 1.0);
        assert_eq!(cosine(&e1, &unit(&[0.0, 1.0])).unwrap().get(), 0.0);
        let c = cosine(&e1, &unit(&[1.0, 1.0])).unwrap().get();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn zero_vector_is_degenerate() {
        let z = Embedding::zero(2, "t", "t");
        let c = cosine(&z, &unit(&[1.0, 0.0])).unwrap();
        assert!(c.degenerate);
        assert_eq!(c.get(), 0.0);
    }

    #[test]
    fn dim_mismatch() {
        assert!(matches!(cosine(&unit(&[1.0]), &unit(&[1.0, 0.0])), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn classify_is_inclusive() {
        assert_eq!(classify(SimilarityValue::new(0.65), 0.6091), BinaryLabel::Similar);
        assert_eq!(classify(SimilarityValue::new(0.6091), 0.6091), BinaryLabel::Similar);
        assert_eq!(classify(SimilarityValue::new(0.60), 0.6531), BinaryLabel::Dissimilar);
    }

    #[test]
    fn identical_texts_score_one() {
        let p = TestProvider::new(32).unwrap();
        let s = pairwise_scores(&[("Do you nap?", Lang::En, "Do you nap?", Lang::En)], &p, None).unwrap();
        assert!((s[0].get() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bow_refuses_korean_without_translator() {
        let p = BowProvider::new(build_vocabulary(&["binge eating"]).unwrap()).unwrap();
        let pairs = [
            ("binge eating", Lang::En, "binge eating", Lang::En),
            ("억제할 수 없이 폭식을 한 적이 있다.", Lang::Ko, "binge eating", Lang::En),
        ];
        match pairwise_scores(&pairs, &p, None) {
            Err(Error::AtPair { index: 1, source }) => assert!(matches!(*source, Error::UnsupportedLanguage { .. })),
            other => panic!("unexpected {other:?}"),
        }
        let s = pairwise_scores(&pairs, &p, Some(FixtureTranslator::shipped())).unwrap();
        assert!(s[1].get() > 0.5);
    }

    struct Counting(TestProvider, std::sync::Mutex<usize>);

    impl EmbeddingProvider for Counting {
        fn descriptor(&self) -> &crate::providers::ProviderDescriptor {
            self.0.descriptor()
        }
        fn compute(&self, texts: &[&str], lang: Lang) -> Result<Vec<Embedding>> {
            *self.1.lock().unwrap() += texts.len();
            self.0.compute(texts, lang)
        }
    }

    #[test]
    fn each_text_embedded_once() {
        let p = Counting(TestProvider::new(8).unwrap(), Default::default());
        let pairs = [("a", Lang::En, "b", Lang::En), ("b", Lang::En, "a", Lang::En), ("a", Lang::Ko, "a", Lang::En)];
        let s = pairwise_scores(&pairs, &p, None).unwrap();
        assert_eq!(*p.1.lock().unwrap(), 3);
        assert_eq!(s[0], s[1]);
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(a in proptest::collection::vec(-1.0f64..1.0, 8), b in proptest::collection::vec(-1.0f64..1.0, 8)) {
            prop_assume!(a.iter().any(|&x| x != 0.0) && b.iter().any(|&x| x != 0.0));
            let (ea, eb) = (unit(&a), unit(&b));
            let ab = cosine(&ea, &eb).unwrap().get();
            prop_assert_eq!(ab.to_bits(), cosine(&eb, &ea).unwrap().get().to_bits());
            prop_assert!((-1.0..=1.0).contains(&ab));
            let raw = dot(&ea.values, &eb.values);
            prop_assert!((raw - ab).abs() <= 1e-5);
        }
    }
}
