mod common;

use std::path::Path;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use provline::io::Corpus;
use provline::queue::PriorityWeights;
use provline::report::{diff, load_mentions, Comparison, Side};
use provline::server::{router, AppState};
use provline_core::{ConflictMode, TrustPolicy};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(root: &Path) -> Router {
    router(AppState::load(root, PriorityWeights::default()).unwrap())
}

async fn send(app: &Router, request: Request<Body>) -> (StatusCode, Value) {
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn review(app: &Router, event_id: &str, body: &str) -> (StatusCode, Value) {
    let request = Request::post(format!("/api/events/{event_id}/review"))
        .header("content-type", "application/json")
        .body(Body::from(body.to_owned()))
        .unwrap();
    send(app, request).await
}

async fn approve(app: &Router, event_id: &str) -> Value {
    let (status, body) = review(app, event_id, r#"{"review_status":"approved","reviewer_id":"ana"}"#).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    body
}

fn queue_ids(queue: &Value) -> Vec<&str> {
    queue.as_array().unwrap().iter().map(|i| i["event_id"].as_str().unwrap()).collect()
}

/// The same report the CLI would produce from the corpus files.
fn offline_volatility(root: &Path, a: &str, b: &str) -> Value {
    let corpus = Corpus::load(root).unwrap();
    let events = corpus.effective_events().unwrap();
    let (pa, pb) = (TrustPolicy::preset(a).unwrap(), TrustPolicy::preset(b).unwrap());
    let cmp = Comparison::build(&corpus, &events, &pa, &pb, ConflictMode::Resolve).unwrap();
    let ma = load_mentions(&corpus.mentions_dir(a), a, &cmp.variants_a).unwrap();
    let mb = load_mentions(&corpus.mentions_dir(b), b, &cmp.variants_b).unwrap();
    let report = diff(
        &Side { policy: a, variants: &cmp.variants_a, mentions: &ma },
        &Side { policy: b, variants: &cmp.variants_b, mentions: &mb },
        &cmp.events,
    )
    .unwrap();
    serde_json::to_value(report).unwrap()
}

#[tokio::test]
async fn empty_corpus_lists_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("empty");
    Corpus::create(&root, &[], &[]).unwrap();
    std::fs::create_dir_all(root.join("mentions/raw")).unwrap();
    let app = app(&root);
    assert_eq!(get(&app, "/api/docs").await, (StatusCode::OK, json!([])));
    assert_eq!(get(&app, "/api/queue").await, (StatusCode::OK, json!([])));
    let (status, health) = get(&app, "/api/health").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(health, json!({"status": "ok", "documents": 0, "events": 0, "decisions": 0}));
    let (status, report) = get(&app, "/api/volatility?policy_a=raw&policy_b=raw").await;
    assert_eq!(status, StatusCode::OK, "{report}");
    assert_eq!(report["volatile"], 0);
}

#[tokio::test]
async fn documents_and_events() {
    let dir = tempfile::tempdir().unwrap();
    let root = common::corpus(dir.path());
    let app = app(&root);
    let (_, docs) = get(&app, "/api/docs").await;
    assert_eq!(docs[0]["doc_id"], "doc_017");
    assert_eq!(docs[0]["events"], 3);
    assert_eq!(docs[1]["events"], 1);
    let (_, doc) = get(&app, "/api/docs/doc_017").await;
    assert_eq!(doc["text"], common::LETTER);
    let (_, events) = get(&app, "/api/docs/doc_017/events").await;
    assert_eq!(events.as_array().unwrap().len(), 3);
    assert_eq!(events[0]["orig_text"], "Madifon");
    let (status, v) = get(&app, "/api/docs/doc_017/variants/conf%3E%3D0.70").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["text"], "Letter from Madison to the Council.\nFootnote: NewYork papers.");
}

#[tokio::test]
async fn approving_closes_the_review_loop() {
    let dir = tempfile::tempdir().unwrap();
    let root = common::corpus(dir.path());
    let app = app(&root);

    let (status, before) = get(&app, "/api/docs/doc_017/variants/approved").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(before["text"], common::LETTER);
    let (_, vol_before) = get(&app, "/api/volatility?policy_a=raw&policy_b=approved").await;
    assert_eq!(vol_before, offline_volatility(&root, "raw", "approved"));
    assert_eq!(vol_before["volatile"], 1);

    let event = approve(&app, "m1").await;
    assert_eq!(event["event_id"], "m1");
    assert_eq!(event["review_status"], "approved");
    assert_eq!(event["reviewer_id"], "ana");

    let (_, after) = get(&app, "/api/docs/doc_017/variants/approved").await;
    assert_eq!(after["text"], "Letter from Madison to the council.\nFootnote: NewYork papers.");
    assert_ne!(after["variant_id"], before["variant_id"]);

    // The approved variant changed under its mentions.
    let (status, err) = get(&app, "/api/volatility?policy_a=raw&policy_b=approved").await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["error"], "mentions_stale");

    common::write_mentions(&root, "approved");
    let (status, vol_after) = get(&app, "/api/volatility?policy_a=raw&policy_b=approved").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(vol_after, offline_volatility(&root, "raw", "approved"));
    assert_eq!(vol_after["volatile"], 2);
    let surfaces: Vec<&str> = vol_after["records"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|r| r["mention_b"]["surface"].as_str())
        .collect();
    assert!(surfaces.contains(&"Madison"), "{surfaces:?}");
}

#[tokio::test]
async fn rejected_events_leave_every_variant() {
    let dir = tempfile::tempdir().unwrap();
    let root = common::corpus(dir.path());
    let app = app(&root);
    let (_, before) = get(&app, "/api/docs/doc_017/variants/all").await;
    assert!(before["text"].as_str().unwrap().contains("Council"));
    let (status, event) = review(&app, "h1", r#"{"review_status":"rejected","reviewer_id":"ben"}"#).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(event["review_status"], "rejected");
    let (_, after) = get(&app, "/api/docs/doc_017/variants/all").await;
    assert_eq!(after["text"], "Letter from Madison to the council.\nFootnote: New York papers.");
    let entry = after["trace"]["entries"].as_array().unwrap().iter().find(|e| e["event_id"] == "h1").unwrap().clone();
    assert_eq!(entry["outcome"], "excluded_rejected");
}

#[tokio::test]
async fn errors_are_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let root = common::corpus(dir.path());
    let app = app(&root);
    let cases = [
        ("/api/docs/nope", StatusCode::NOT_FOUND, "unknown_document"),
        ("/api/docs/nope/events", StatusCode::NOT_FOUND, "unknown_document"),
        ("/api/docs/nope/variants/raw", StatusCode::NOT_FOUND, "unknown_document"),
        ("/api/docs/doc_017/variants/trusted", StatusCode::NOT_FOUND, "unknown_policy"),
        ("/api/queue?limit=many", StatusCode::BAD_REQUEST, "bad_request"),
        ("/api/volatility?policy_a=raw", StatusCode::BAD_REQUEST, "bad_request"),
        ("/api/volatility?policy_a=raw&policy_b=conf85", StatusCode::CONFLICT, "mentions_missing"),
    ];
    for (uri, status, code) in cases {
        let (got, body) = get(&app, uri).await;
        assert_eq!((got, body["error"].as_str()), (status, Some(code)), "{uri}: {body}");
        assert!(body["message"].is_string());
    }
    let posts = [
        ("ghost", r#"{"review_status":"approved","reviewer_id":"ana"}"#, StatusCode::NOT_FOUND),
        ("m1", r#"{"review_status":"maybe","reviewer_id":"ana"}"#, StatusCode::BAD_REQUEST),
        ("m1", r#"{"review_status":"approved"}"#, StatusCode::BAD_REQUEST),
        ("m1", "not json", StatusCode::BAD_REQUEST),
    ];
    for (id, body, status) in posts {
        assert_eq!(review(&app, id, body).await.0, status, "{id} {body}");
    }
    let (_, health) = get(&app, "/api/health").await;
    assert_eq!(health["decisions"], 0, "failed requests log nothing");
}

#[tokio::test]
async fn cors_allows_the_ui_origin() {
    let dir = tempfile::tempdir().unwrap();
    let root = common::corpus(dir.path());
    let request = Request::get("/api/docs").header("origin", "http://localhost:5173").body(Body::empty()).unwrap();
    let response = app(&root).oneshot(request).await.unwrap();
    assert_eq!(response.headers()["access-control-allow-origin"], "*");
}

#[tokio::test]
async fn queue_is_prioritized_by_signals() {
    let dir = tempfile::tempdir().unwrap();
    let root = common::corpus(dir.path());
    let app = app(&root);
    assert_eq!(get(&app, "/api/queue?limit=0").await.1, json!([]));
    let (_, queue) = get(&app, "/api/queue").await;
    // s1 raises every signal; h1 and m1 are only unreviewed; b1 raises none.
    assert_eq!(queue_ids(&queue), ["s1", "h1", "m1"]);
    assert_eq!(queue[0]["priority"], 1.0);
    assert_eq!(queue[1]["priority"], queue[2]["priority"]);
    assert_eq!(queue[2]["context"], common::LETTER);
    assert_eq!(queue_ids(&get(&app, "/api/queue?limit=1").await.1), ["s1"]);

    for id in ["s1", "h1", "m1"] {
        approve(&app, id).await;
    }
    let (_, queue) = get(&app, "/api/queue").await;
    assert_eq!(queue_ids(&queue), ["s1"]);
    assert_eq!(queue[0]["review_status"], "approved");
    let signals: Vec<&str> = queue[0]["signals"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    assert!(!signals.contains(&"unreviewed"), "{signals:?}");
}

#[tokio::test]
async fn raw_against_raw_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let root = common::corpus(dir.path());
    let (status, report) = get(&app(&root), "/api/volatility?policy_a=raw&policy_b=raw").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(report["volatile"], 0);
    assert_eq!(report["records"], json!([]));
}

#[tokio::test]
async fn decisions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let root = common::corpus(dir.path());
    let uris = [
        "/api/health",
        "/api/docs",
        "/api/docs/doc_017/events",
        "/api/docs/doc_017/variants/approved",
        "/api/queue",
    ];
    let first = app(&root);
    approve(&first, "m1").await;
    review(&first, "s1", r#"{"review_status":"rejected","reviewer_id":"ben"}"#).await;
    let mut before = Vec::new();
    for uri in uris {
        before.push(get(&first, uri).await);
    }
    drop(first);
    let second = app(&root);
    for (uri, expected) in uris.iter().zip(before) {
        assert_eq!(get(&second, uri).await, expected, "{uri}");
    }
    let (_, events) = get(&second, "/api/docs/doc_017/events").await;
    assert_eq!(events[0]["review_status"], "approved");
}

#[tokio::test]
async fn concurrent_reviews_are_serialized() {
    let dir = tempfile::tempdir().unwrap();
    let root = common::corpus(dir.path());
    let app = app(&root);
    let mut tasks = Vec::new();
    for i in 0..24 {
        let app = app.clone();
        tasks.push(tokio::spawn(async move {
            let (id, status) = [("m1", "approved"), ("h1", "rejected"), ("s1", "unreviewed")][i % 3];
            let body = format!(r#"{{"review_status":"{status}","reviewer_id":"r{i}"}}"#);
            review(&app, id, &body).await.0
        }));
    }
    for t in tasks {
        assert_eq!(t.await.unwrap(), StatusCode::OK);
    }
    assert_eq!(get(&app, "/api/health").await.1["decisions"], 24);
    let log = provline::io::read_decisions(&root.join("decisions.jsonl")).unwrap();
    assert_eq!(log.len(), 24);
}
