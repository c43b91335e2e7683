//! Start the question-bank service on an ephemeral port and talk to it over
//! HTTP.

use std::sync::Arc;

use qbank::metrics::ThresholdProfile;
use qbank::providers::TestProvider;
use qbank::service::{http, BankStore};
use serde_json::{json, Value};

fn main() -> qbank::Result<()> {
    let dir = std::env::temp_dir().join(format!("qbank-http-example-{}", std::process::id()));
    let store = BankStore::open(&dir, Arc::new(TestProvider::new(64)?), ThresholdProfile::fixed(0.8))?;
    let server = http::spawn(Arc::new(store), "127.0.0.1:0", 10)?;
    let base = server.url();
    println!("listening on {base}");

    let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
    let post = |path: &str, body: Value| -> Value {
        agent.post(&format!("{base}{path}")).send_json(&body).unwrap().body_mut().read_json().unwrap()
    };
    for (text, domain) in [("Do you snore?", "SLEEP"), ("How stressed do you feel at work?", "STRESS")] {
        println!("register: {}", post("/v1/questions", json!({"text": text, "lang": "en", "domain": domain})));
    }
    println!("similar: {}", post("/v1/similar", json!({"text": "Do you snore?", "lang": "en", "k": 2})));
    println!("bad k:   {}", post("/v1/similar", json!({"text": "Do you snore?", "lang": "en", "k": -1})));
    let health: Value = agent.get(&format!("{base}/v1/health")).call().unwrap().body_mut().read_json().unwrap();
    println!("health:  {health}");

    drop(server);
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}
