use std::collections::BTreeMap;

use qbank::providers::{load_embeddings, store_embeddings, Embedding, EmbeddingProvider, StoreProvider, TestProvider};
use qbank::model::content_id;
use qbank::{Error, Lang};

#[test]
fn bank_sized_roundtrip_and_file_size() {
    let p = TestProvider::new(768).unwrap();
    let texts: Vec<String> = (0..1835).map(|i| format!("survey question {i}")).collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let map: BTreeMap<String, Embedding> =
        refs.iter().zip(p.embed(&refs, Lang::En).unwrap()).map(|(t, e)| (content_id(t, Lang::En), e)).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bank.emb1");
    store_embeddings(&path, &map).unwrap();

    // magic + dim + provider_id (length-prefixed), then per record a u32 id
    // length, the id bytes and 768 f32 values.
    let header = 4 + 4 + 4 + "test-768".len();
    let records: usize = map.keys().map(|id| 4 + id.len() + 768 * 4).sum();
    assert_eq!(std::fs::metadata(&path).unwrap().len() as usize, header + records);

    let back = load_embeddings(&path).unwrap();
    assert_eq!(back.len(), 1835);
    for (id, e) in &map {
        let b = &back[id];
        assert!(e.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_eq!(b.provider_id, "test-768");
        assert!(b.normalized);
    }

    let store = StoreProvider::open(&path).unwrap();
    let hit = store.embed_one("survey question 7", Lang::En).unwrap();
    assert_eq!(hit.values, map[&content_id("survey question 7", Lang::En)].values);
    assert!(matches!(store.embed_one("unknown", Lang::En), Err(Error::NotInStore(_))));
}

#[test]
fn wrong_magic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.emb1");
    std::fs::write(&path, b"NOPE\x04\0\0\0\0\0\0\0").unwrap();
    assert!(matches!(load_embeddings(&path), Err(Error::BadMagic)));
}
