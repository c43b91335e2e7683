//! Write embeddings to an EMB1 file and serve them back as a provider keyed by
//! question content.

use std::collections::BTreeMap;

use qbank::model::content_id;
use qbank::providers::{load_embeddings, store_embeddings, EmbeddingProvider, StoreProvider, TestProvider};
use qbank::Lang;

fn main() -> qbank::Result<()> {
    let texts = ["Do you snore?", "How long do you sleep?", "Do you exercise on weekends?"];
    let test = TestProvider::new(16)?;
    let map: BTreeMap<_, _> =
        texts.iter().zip(test.embed(&texts, Lang::En)?).map(|(t, e)| (content_id(t, Lang::En), e)).collect();

    let dir = std::env::temp_dir().join(format!("qbank-store-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| qbank::Error::io(&dir, e))?;
    let path = dir.join("questions.emb1");
    store_embeddings(&path, &map)?;
    println!("{} bytes for {} vectors", std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0), map.len());

    let back = load_embeddings(&path)?;
    assert_eq!(back, map);
    let store = StoreProvider::open(&path)?;
    println!("store provider {} (dim {})", store.descriptor().provider_id, store.descriptor().dim);
    let e = store.embed_one("Do you snore?", Lang::En)?;
    println!("first components {:?}", &e.values[..4]);
    match store.embed_one("Never stored", Lang::En) {
        Err(err) => println!("miss: {err}"),
        Ok(_) => unreachable!(),
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}
