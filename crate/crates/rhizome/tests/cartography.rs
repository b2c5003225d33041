use std::collections::BTreeSet;
use std::path::Path;

use rhizome::cartography::Cartography;
use rhizome::pipeline::{run_inline, RunConfig, Services};
use rhizome::topography::TopographyOutcome;
use serde_json::{json, Value};

async fn fixture_cartography() -> Cartography {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("energy-information-nexus");
    let config = RunConfig::fixture("energy-information nexus", dir);
    let services = Services::from_config(&config).unwrap();
    let (handle, ok) = run_inline(config, services).await;
    assert!(ok);
    (*handle.cartography().unwrap()).clone()
}

fn validator() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join("cartography.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn errors(v: &jsonschema::Validator, doc: &Value) -> Vec<String> {
    v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect()
}

#[tokio::test]
async fn fixture_document_validates() {
    let c = fixture_cartography().await;
    let v = validator();
    let doc: Value = serde_json::from_str(&c.to_json()).unwrap();
    assert_eq!(errors(&v, &doc), Vec::<String>::new());

    let back: Cartography = serde_json::from_value(doc).unwrap();
    assert_eq!(back, c);
}

#[tokio::test]
async fn every_topography_state_validates() {
    let mut c = fixture_cartography().await;
    let v = validator();
    for outcome in [TopographyOutcome::Pending, TopographyOutcome::Unavailable { reason: "sidecar down".into() }] {
        c.topography = outcome;
        let doc: Value = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(errors(&v, &doc), Vec::<String>::new());
    }
}

#[tokio::test]
async fn empty_sections_stay_valid() {
    let mut c = fixture_cartography().await;
    c.anomalies.clear();
    c.assemblages.clear();
    c.ruptures.clear();
    c.refused_triggers.clear();
    c.skipped_pairs.clear();
    c.cross_check().unwrap();
    let doc: Value = serde_json::from_str(&c.to_json()).unwrap();
    assert_eq!(errors(&validator(), &doc), Vec::<String>::new());
    assert_eq!(doc["anomalies"], json!([]));
}

#[tokio::test]
async fn schema_rejects_broken_documents() {
    let c = fixture_cartography().await;
    let v = validator();
    let good: Value = serde_json::from_str(&c.to_json()).unwrap();
    let breakages: [(&str, fn(&mut Value)); 6] = [
        ("hint", |d| d["graph"]["edges"][0]["render_hint"] = json!("neon")),
        ("subtype", |d| {
            d["graph"]["edges"][0]["edge_class"] = json!("constructive");
            d["graph"]["edges"][0]["subtype"] = json!("contradicts");
            d["graph"]["edges"][0]["render_hint"] = json!("solid");
        }),
        ("title", |d| d["assemblages"][0]["title"] = json!("The entanglement of flows")),
        ("version", |d| d["schema_version"] = json!("0.9.0")),
        ("section", |d| {
            d.as_object_mut().unwrap().remove("ruptures");
        }),
        ("confidence", |d| d["readings"][0]["confidence"] = json!(1.4)),
    ];
    for (name, breaks) in breakages {
        let mut doc = good.clone();
        breaks(&mut doc);
        assert!(!v.is_valid(&doc), "{name} accepted");
    }
}

#[tokio::test]
async fn classified_pairs_are_the_candidate_union() {
    let c = fixture_cartography().await;
    let ids: BTreeSet<&str> = c.corpus.papers.iter().map(|p| p.id.as_str()).collect();
    let unordered =
        |a: &str, b: &str| if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };

    let mut expected: BTreeSet<(String, String)> =
        c.citation_shadow.shadow_edges.iter().map(|(a, b)| unordered(a, b)).collect();
    for a in &c.anomalies {
        let members: Vec<&str> = a.paper_ids.iter().map(String::as_str).filter(|p| ids.contains(p)).collect();
        for x in &members {
            for y in &members {
                if x != y {
                    expected.insert(unordered(x, y));
                }
            }
        }
    }
    assert!(expected.len() <= c.config.pair_cap);

    let mut classified: Vec<(String, String)> = c.graph.edges.iter().map(|e| unordered(&e.from_id, &e.to_id)).collect();
    classified.extend(c.skipped_pairs.iter().map(|s| unordered(&s.from_id, &s.to_id)));
    let distinct: BTreeSet<(String, String)> = classified.iter().cloned().collect();
    assert_eq!(distinct.len(), classified.len(), "a pair was classified twice");
    assert_eq!(distinct, expected);
}
