use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use trelkit_core::collection::{write_judgments, write_pools};
use trelkit_core::synth::{generate_fixture, Fixture, FixtureConfig};
use trelkit_core::PoolSpec;
use trelkit_judging::http::{app, TOKEN_HEADER};
use trelkit_judging::ServiceConfig;

const ASSESSOR: &str = "class-token";
const OPERATOR: &str = "teacher-token";

fn small_fixture() -> Fixture {
    generate_fixture(&FixtureConfig {
        n_topics: 4,
        n_dual_topics: 3,
        n_noise_topics: 1,
        docs_per_topic: 60,
        n_pooling_runs: 3,
        n_systems: 3,
        system_tiers: 3,
        run_length: 20,
        pool: PoolSpec::new(20, 3, 3).unwrap(),
        ..FixtureConfig::default()
    })
    .unwrap()
}

fn config(dir: &Path, fixture: &Fixture) -> ServiceConfig {
    fixture.write_to(&dir.join("fixture")).unwrap();
    ServiceConfig {
        documents_dir: Some(dir.join("fixture/docs")),
        manifest: Some(dir.join("fixture/manifest.csv")),
        topics: Some(dir.join("fixture/topics.xml")),
        assessor_token: Some(ASSESSOR.into()),
        operator_token: Some(OPERATOR.into()),
        shuffle_seed: 5,
        compact_every: 7,
        ..ServiceConfig::new(dir.join("data"))
    }
}

fn assessors(fixture: &Fixture) -> BTreeMap<String, Vec<String>> {
    let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for set in &fixture.judgments {
        for t in set.topic_ids() {
            map.entry(t.to_string()).or_default().push(set.assessor_id.clone());
        }
    }
    map
}

struct Client {
    app: Router,
}

impl Client {
    async fn send(&self, method: &str, uri: &str, token: Option<&str>, body: Option<String>) -> (StatusCode, String) {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header(TOKEN_HEADER, t);
        }
        if body.is_some() {
            req = req.header("content-type", "application/json");
        }
        let req = req.body(body.map(Body::from).unwrap_or_else(Body::empty)).unwrap();
        let res = self.app.clone().oneshot(req).await.unwrap();
        let status = res.status();
        let bytes = res.into_body().collect().await.unwrap().to_bytes();
        (status, String::from_utf8(bytes.to_vec()).unwrap())
    }

    async fn get(&self, uri: &str) -> (StatusCode, Value) {
        let (s, b) = self.send("GET", uri, Some(ASSESSOR), None).await;
        (s, serde_json::from_str(&b).unwrap())
    }

    async fn judge(&self, assessor: &str, topic: &str, doc: &str, level: i64) -> (StatusCode, Value) {
        let body = json!({"assessor_id": assessor, "topic_id": topic, "doc_id": doc, "level": level});
        let (s, b) = self.send("POST", "/judgments", Some(ASSESSOR), Some(body.to_string())).await;
        (s, serde_json::from_str(&b).unwrap())
    }

    async fn operator(&self, method: &str, uri: &str, body: Option<String>) -> (StatusCode, String) {
        self.send(method, uri, Some(OPERATOR), body).await
    }
}

async fn started(dir: &Path, fixture: &Fixture) -> Client {
    let client = Client { app: app(&config(dir, fixture)).unwrap() };
    let upload = json!({"pools": write_pools(&fixture.pools), "assessors": assessors(fixture)});
    let (s, b) = client.operator("POST", "/pools", Some(upload.to_string())).await;
    assert_eq!(s, StatusCode::OK, "{b}");
    client
}

/// Every object key and string value anywhere in a JSON document.
fn words(v: &Value, keys: &mut BTreeSet<String>, strings: &mut Vec<String>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                keys.insert(k.clone());
                words(x, keys, strings);
            }
        }
        Value::Array(a) => a.iter().for_each(|x| words(x, keys, strings)),
        Value::String(s) => strings.push(s.clone()),
        _ => {}
    }
}

const FORBIDDEN: &[&str] = &[
    "provenance", "pooling_run", "search_engine", "noise", "depth", "rank", "score", "source",
    "pool",
];

fn assert_blind(v: &Value, other_assessors: &[&str]) {
    let (mut keys, mut strings) = (BTreeSet::new(), Vec::new());
    words(v, &mut keys, &mut strings);
    for k in &keys {
        let lower = k.to_lowercase();
        assert!(!FORBIDDEN.iter().any(|f| lower.contains(f)), "key {k} in {v}");
    }
    for s in &strings {
        let lower = s.to_lowercase();
        assert!(!FORBIDDEN.iter().any(|f| lower.contains(f)), "value {s:?}");
        for other in other_assessors {
            assert!(!s.contains(other), "other assessor {other} visible");
        }
    }
}

#[tokio::test]
async fn assessor_endpoints_are_blind() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = small_fixture();
    let c = started(dir.path(), &fixture).await;
    let all: Vec<String> = fixture.judgments.iter().map(|s| s.assessor_id.clone()).collect();
    for set in &fixture.judgments {
        let me = &set.assessor_id;
        let others: Vec<&str> = all.iter().filter(|a| *a != me).map(String::as_str).collect();
        let (s, topics) = c.get(&format!("/assignments/{me}")).await;
        assert_eq!(s, StatusCode::OK);
        assert_blind(&topics, &others);
        for t in topics["topics"].as_array().unwrap() {
            let keys: BTreeSet<&str> = t.as_object().unwrap().keys().map(String::as_str).collect();
            assert_eq!(keys, BTreeSet::from(["topic_id", "title", "levels", "judged_count", "total"]));
        }
        let topic = set.topic_ids().next().unwrap();
        let mut judged = Vec::new();
        loop {
            let (s, next) = c.get(&format!("/assignments/{me}/{topic}/next")).await;
            assert_eq!(s, StatusCode::OK);
            assert_blind(&next, &others);
            if next.get("done").is_some() {
                break;
            }
            let keys: BTreeSet<&str> = next.as_object().unwrap().keys().map(String::as_str).collect();
            assert_eq!(keys, BTreeSet::from(["doc_id", "title", "body", "judged_count", "total"]));
            let doc = next["doc_id"].as_str().unwrap().to_string();
            let (s, search) = c.get(&format!("/documents/{doc}/search?q=the")).await;
            assert_eq!(s, StatusCode::OK);
            assert_blind(&search, &others);
            let (s, ack) = c.judge(me, topic, &doc, 0).await;
            assert_eq!(s, StatusCode::OK);
            assert_blind(&ack, &others);
            let (_, view) = c.get(&format!("/assignments/{me}/{topic}/documents/{doc}")).await;
            assert_blind(&view, &others);
            judged.push(doc);
        }
        let (_, history) = c.get(&format!("/assignments/{me}/{topic}/history")).await;
        assert_blind(&history, &others);
        assert_eq!(history.as_array().unwrap().len(), judged.len());
    }
}

#[tokio::test]
async fn judging_flow() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = small_fixture();
    let c = started(dir.path(), &fixture).await;
    let set = &fixture.judgments[0];
    let (me, topic) = (set.assessor_id.as_str(), set.topic_ids().next().unwrap());
    let (_, first) = c.get(&format!("/assignments/{me}/{topic}/next")).await;
    let doc = first["doc_id"].as_str().unwrap().to_string();
    assert_eq!(first["judged_count"], 0);
    let total = first["total"].as_u64().unwrap() as usize;
    assert_eq!(total, fixture.pools.iter().find(|p| p.topic_id == topic).unwrap().size());
    assert!(!first["body"].as_str().unwrap().contains("<script"));

    assert_eq!(c.judge(me, topic, &doc, 5).await.0, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(c.judge(me, topic, "nope", 1).await.0, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(c.judge("stranger", topic, &doc, 1).await.0, StatusCode::NOT_FOUND);
    let (s, ack) = c.judge(me, topic, &doc, 2).await;
    assert_eq!((s, ack["judged_count"].as_u64()), (StatusCode::OK, Some(1)));
    let (_, second) = c.get(&format!("/assignments/{me}/{topic}/next")).await;
    assert_ne!(second["doc_id"], first["doc_id"]);
    let (s, _) = c.judge(me, topic, &doc, 1).await;
    assert_eq!(s, StatusCode::OK);
    // duplicate delivery of the client's second revision
    let body = json!({"assessor_id": me, "topic_id": topic, "doc_id": doc, "level": 1, "revision": 2});
    let (s, b) = c.send("POST", "/judgments", Some(ASSESSOR), Some(body.to_string())).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(serde_json::from_str::<Value>(&b).unwrap()["revision"], 2);

    let (_, audit) = c.operator("GET", "/audit", None).await;
    let audit: Vec<Value> = serde_json::from_str(&audit).unwrap();
    assert_eq!(audit.iter().filter(|e| e["doc_id"] == doc.as_str()).count(), 2);
    let (_, export) = c.operator("GET", &format!("/export?topic={topic}"), None).await;
    assert_eq!(export, format!("{topic} {me} {doc} 1\n"));

    for _ in 1..total {
        let (_, next) = c.get(&format!("/assignments/{me}/{topic}/next")).await;
        let d = next["doc_id"].as_str().unwrap().to_string();
        assert_eq!(c.judge(me, topic, &d, 0).await.0, StatusCode::OK);
    }
    let (_, done) = c.get(&format!("/assignments/{me}/{topic}/next")).await;
    assert_eq!(done, json!({"done": true, "judged_count": total, "total": total}));
}

#[tokio::test]
async fn export_ingest_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = small_fixture();
    let file = write_judgments(&fixture.judgments);
    let c = started(dir.path(), &fixture).await;
    let (s, b) = c.operator("POST", "/ingest", Some(file.clone())).await;
    assert_eq!(s, StatusCode::OK, "{b}");
    let (_, export) = c.operator("GET", "/export", None).await;
    assert_eq!(export, file);
    let pairs: usize = fixture.pools.iter().map(|p| p.size() * assessors(&fixture)[&p.topic_id].len()).sum();
    assert_eq!(export.lines().count(), pairs);

    // a restarted service replays to the same export
    drop(c);
    let c = Client { app: app(&config(dir.path(), &fixture)).unwrap() };
    assert_eq!(c.operator("GET", "/export", None).await.1, file);
}

#[tokio::test]
async fn tokens_and_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = small_fixture();
    let c = started(dir.path(), &fixture).await;
    let me = &fixture.judgments[0].assessor_id;
    assert_eq!(c.send("GET", &format!("/assignments/{me}"), None, None).await.0, StatusCode::UNAUTHORIZED);
    assert_eq!(c.send("GET", "/export", Some(ASSESSOR), None).await.0, StatusCode::UNAUTHORIZED);
    assert_eq!(c.send("GET", &format!("/assignments/{me}"), Some(OPERATOR), None).await.0, StatusCode::OK);
    let again = json!({"pools": write_pools(&fixture.pools), "assessors": assessors(&fixture)});
    assert_eq!(c.operator("POST", "/pools", Some(again.to_string())).await.0, StatusCode::CONFLICT);
    assert_eq!(c.get("/documents/unknown/search?q=x").await.0, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_assessors() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = small_fixture();
    let c = std::sync::Arc::new(started(dir.path(), &fixture).await);
    let mut tasks = Vec::new();
    for set in fixture.judgments.clone() {
        for topic in set.topic_ids().map(String::from).collect::<Vec<_>>() {
            let c = std::sync::Arc::clone(&c);
            let me = set.assessor_id.clone();
            let truth = set.clone();
            tasks.push(tokio::spawn(async move {
                loop {
                    let (_, next) = c.get(&format!("/assignments/{me}/{topic}/next")).await;
                    let Some(doc) = next["doc_id"].as_str().map(String::from) else { break };
                    let level = truth.get(&topic, &doc).unwrap().value() as i64;
                    assert_eq!(c.judge(&me, &topic, &doc, level).await.0, StatusCode::OK);
                }
            }));
        }
    }
    for t in tasks {
        t.await.unwrap();
    }
    assert_eq!(c.operator("GET", "/export", None).await.1, write_judgments(&fixture.judgments));
}

#[tokio::test]
async fn noise_qc_counts() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = generate_fixture(&FixtureConfig {
        planted_noise_violations: 1,
        unjudgeable_rate: 0.0,
        ..FixtureConfig::default()
    })
    .unwrap();
    let c = started(dir.path(), &fixture).await;
    c.operator("POST", "/ingest", Some(write_judgments(&fixture.judgments))).await;
    let (s, qc) = c.operator("GET", "/qc", None).await;
    assert_eq!(s, StatusCode::OK);
    let qc: Value = serde_json::from_str(&qc).unwrap();
    assert_eq!(qc["noise_judged"], 10 * (20 + 17));
    assert_eq!(qc["violations"], 1);
    assert!(qc["assessors"].as_array().unwrap().iter().all(|a| a["flagged"] == false));
    let (_, csv) = c.operator("GET", "/qc?format=csv", None).await;
    assert!(csv.lines().last().unwrap().starts_with("total,370,1,"));
}
