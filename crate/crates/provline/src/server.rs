//! HTTP review service.
//!
//! Reads see one consistent snapshot of the decisions log. Decisions are
//! serialized through the snapshot's write lock, appended to the log and
//! synced to disk before the response is sent; the snapshot, including its
//! variant cache, is then rebuilt. Variants are reconstructed on demand in
//! `resolve` conflict mode so that every document can be rendered.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use provline_core::digest::content_digest;
use provline_core::{reconstruct, BaseDocument, ConflictMode, ReviewStatus, SpanEditEvent, TrustPolicy, Variant};
use serde::Serialize;
use serde_json::{json, Value};
use tokio::sync::RwLock;
use tower_http::cors::{Any, CorsLayer};
use tower_http::services::ServeDir;

use crate::io::corpus::MENTIONS_DIR;
use crate::io::{append_decision, merge_decisions, Corpus, ReviewDecision};
use crate::queue::{review_queue, PriorityWeights};
use crate::report::{diff, load_mentions, MentionError, Side};

pub const DEFAULT_QUEUE_LIMIT: usize = 20;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn internal(message: impl ToString) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.code, "message": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

struct Snapshot {
    decisions: usize,
    effective: Vec<SpanEditEvent>,
    index: HashMap<String, usize>,
    cache: Mutex<HashMap<(String, String), Arc<Variant>>>,
}

impl Snapshot {
    fn new(raw: &[SpanEditEvent], decisions: &[ReviewDecision]) -> crate::io::Result<Self> {
        let effective = merge_decisions(raw, decisions)?;
        let index = effective.iter().enumerate().map(|(i, e)| (e.event_id.clone(), i)).collect();
        Ok(Snapshot {
            decisions: decisions.len(),
            effective,
            index,
            cache: Mutex::default(),
        })
    }
}

struct Shared {
    documents: BTreeMap<String, BaseDocument>,
    raw_events: Vec<SpanEditEvent>,
    decisions_path: PathBuf,
    mentions_root: PathBuf,
    weights: PriorityWeights,
    /// The log as merged into the current snapshot. Only touched under the
    /// snapshot write lock.
    log: Mutex<Vec<ReviewDecision>>,
    snapshot: RwLock<Snapshot>,
}

#[derive(Clone)]
pub struct AppState(Arc<Shared>);

impl AppState {
    pub fn load(root: &Path, weights: PriorityWeights) -> anyhow::Result<Self> {
        let corpus = Corpus::load(root)?;
        let raw_events = corpus.raw_events();
        let snapshot = Snapshot::new(&raw_events, &corpus.decisions)?;
        Ok(AppState(Arc::new(Shared {
            decisions_path: corpus.decisions_path(),
            mentions_root: corpus.root.join(MENTIONS_DIR),
            documents: corpus.documents,
            raw_events,
            weights,
            log: Mutex::new(corpus.decisions),
            snapshot: RwLock::new(snapshot),
        })))
    }
}

pub fn router(state: AppState) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/api/health", get(health))
        .route("/api/docs", get(list_docs))
        .route("/api/docs/{doc_id}", get(get_doc))
        .route("/api/docs/{doc_id}/events", get(doc_events))
        .route("/api/docs/{doc_id}/variants/{policy}", get(doc_variant))
        .route("/api/queue", get(queue))
        .route("/api/events/{event_id}/review", post(review))
        .route("/api/volatility", get(volatility))
        .layer(cors)
        .with_state(state)
}

/// Serves until SIGINT or SIGTERM.
pub async fn serve(state: AppState, addr: SocketAddr, ui_dir: Option<PathBuf>) -> anyhow::Result<()> {
    let mut app = router(state);
    if let Some(dir) = ui_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    let listener = tokio::net::TcpListener::bind(addr).await?;
    println!("listening on http://{}", listener.local_addr()?);
    use std::io::Write;
    std::io::stdout().flush()?;
    axum::serve(listener, app).with_graceful_shutdown(shutdown()).await?;
    Ok(())
}

async fn shutdown() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}

async fn health(State(state): State<AppState>) -> Json<Value> {
    let snap = state.0.snapshot.read().await;
    Json(json!({
        "status": "ok",
        "documents": state.0.documents.len(),
        "events": snap.effective.len(),
        "decisions": snap.decisions,
    }))
}

#[derive(Serialize)]
struct DocSummary<'a> {
    doc_id: &'a str,
    page_id: &'a provline_core::PageId,
    base_revision: u64,
    length: usize,
    digest: String,
    events: usize,
}

async fn list_docs(State(state): State<AppState>) -> Json<Value> {
    let snap = state.0.snapshot.read().await;
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for e in &snap.effective {
        *counts.entry(e.doc_id.as_str()).or_default() += 1;
    }
    let docs: Vec<DocSummary<'_>> = state
        .0
        .documents
        .values()
        .map(|d| DocSummary {
            doc_id: &d.doc_id,
            page_id: &d.page_id,
            base_revision: d.base_revision,
            length: d.char_len(),
            digest: content_digest(&d.text),
            events: counts.get(d.doc_id.as_str()).copied().unwrap_or(0),
        })
        .collect();
    Json(json!(docs))
}

fn document<'a>(state: &'a AppState, doc_id: &str) -> Result<&'a BaseDocument, ApiError> {
    state
        .0
        .documents
        .get(doc_id)
        .ok_or_else(|| ApiError::not_found("unknown_document", format!("no document {doc_id}")))
}

async fn get_doc(State(state): State<AppState>, UrlPath(doc_id): UrlPath<String>) -> ApiResult<Value> {
    let d = document(&state, &doc_id)?;
    Ok(Json(json!({
        "doc_id": d.doc_id,
        "page_id": d.page_id,
        "base_revision": d.base_revision,
        "digest": content_digest(&d.text),
        "text": d.text,
    })))
}

async fn doc_events(State(state): State<AppState>, UrlPath(doc_id): UrlPath<String>) -> ApiResult<Vec<SpanEditEvent>> {
    document(&state, &doc_id)?;
    let snap = state.0.snapshot.read().await;
    Ok(Json(snap.effective.iter().filter(|e| e.doc_id == doc_id).cloned().collect()))
}

fn named_policy(name: &str) -> Result<TrustPolicy, ApiError> {
    TrustPolicy::preset(name)
        .or_else(|| TrustPolicy::parse_shorthand(name))
        .ok_or_else(|| {
            ApiError::not_found(
                "unknown_policy",
                format!("no policy {name}; presets are {}", TrustPolicy::PRESETS.join(", ")),
            )
        })
}

fn variant(snap: &Snapshot, doc: &BaseDocument, policy: &TrustPolicy) -> Result<Arc<Variant>, ApiError> {
    let key = (doc.doc_id.clone(), policy.name.clone());
    if let Some(v) = snap.cache.lock().expect("cache lock").get(&key) {
        return Ok(v.clone());
    }
    let events: Vec<SpanEditEvent> = snap.effective.iter().filter(|e| e.doc_id == doc.doc_id).cloned().collect();
    let v = Arc::new(reconstruct(doc, &events, policy, ConflictMode::Resolve).map_err(|e| {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "replay_failed", e.to_string())
    })?);
    snap.cache.lock().expect("cache lock").insert(key, v.clone());
    Ok(v)
}

async fn doc_variant(
    State(state): State<AppState>,
    UrlPath((doc_id, policy)): UrlPath<(String, String)>,
) -> ApiResult<Variant> {
    let doc = document(&state, &doc_id)?;
    let policy = named_policy(&policy)?;
    let snap = state.0.snapshot.read().await;
    let v = variant(&snap, doc, &policy)?;
    Ok(Json((*v).clone()))
}

async fn queue(State(state): State<AppState>, Query(params): Query<HashMap<String, String>>) -> Result<Json<Value>, ApiError> {
    let limit = match params.get("limit") {
        Some(raw) => raw
            .parse::<usize>()
            .map_err(|_| ApiError::bad_request(format!("limit must be a non-negative integer, got {raw:?}")))?,
        None => DEFAULT_QUEUE_LIMIT,
    };
    let snap = state.0.snapshot.read().await;
    let items = review_queue(&state.0.documents, &snap.effective, &state.0.weights, limit);
    Ok(Json(json!(items)))
}

async fn review(
    State(state): State<AppState>,
    UrlPath(event_id): UrlPath<String>,
    body: axum::body::Bytes,
) -> ApiResult<SpanEditEvent> {
    // Holding the write lock serializes writers and keeps readers on the
    // previous snapshot until the new one is installed.
    let mut snap = state.0.snapshot.write().await;
    if !snap.index.contains_key(&event_id) {
        return Err(ApiError::not_found("unknown_event", format!("no event {event_id}")));
    }
    let body: Value = serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("body is not JSON: {e}")))?;
    let status = body
        .get("review_status")
        .cloned()
        .and_then(|v| serde_json::from_value::<ReviewStatus>(v).ok())
        .ok_or_else(|| ApiError::bad_request("review_status must be one of unreviewed, approved, rejected"))?;
    let reviewer = body
        .get("reviewer_id")
        .and_then(Value::as_str)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| ApiError::bad_request("reviewer_id must be a non-empty string"))?;

    let decision = ReviewDecision::now(event_id.clone(), status, reviewer);
    let path = state.0.decisions_path.clone();
    let written = decision.clone();
    tokio::task::spawn_blocking(move || append_decision(&path, &written))
        .await
        .map_err(ApiError::internal)?
        .map_err(ApiError::internal)?;

    let mut log = state.0.log.lock().expect("log lock");
    log.push(decision);
    *snap = Snapshot::new(&state.0.raw_events, &log).map_err(ApiError::internal)?;
    Ok(Json(snap.effective[snap.index[&event_id]].clone()))
}

async fn volatility(State(state): State<AppState>, Query(params): Query<HashMap<String, String>>) -> Result<Json<Value>, ApiError> {
    let name = |key: &str| {
        params
            .get(key)
            .ok_or_else(|| ApiError::bad_request(format!("missing query parameter {key}")))
    };
    let pa = named_policy(name("policy_a")?)?;
    let pb = named_policy(name("policy_b")?)?;
    let snap = state.0.snapshot.read().await;

    let build = |policy: &TrustPolicy| -> Result<BTreeMap<String, Variant>, ApiError> {
        state
            .0
            .documents
            .values()
            .map(|d| Ok((d.doc_id.clone(), (*variant(&snap, d, policy)?).clone())))
            .collect()
    };
    let (va, vb) = (build(&pa)?, build(&pb)?);
    let mentions = |policy: &TrustPolicy, variants: &BTreeMap<String, Variant>| {
        load_mentions(&state.0.mentions_root.join(&policy.name), &policy.name, variants).map_err(|e| match e {
            MentionError::Missing { .. } => ApiError::new(StatusCode::CONFLICT, "mentions_missing", e.to_string()),
            MentionError::Stale { .. } => ApiError::new(StatusCode::CONFLICT, "mentions_stale", e.to_string()),
            MentionError::Io(io) => ApiError::internal(io),
        })
    };
    let (ma, mb) = (mentions(&pa, &va)?, mentions(&pb, &vb)?);
    let mut events: BTreeMap<String, Vec<SpanEditEvent>> = BTreeMap::new();
    for e in &snap.effective {
        events.entry(e.doc_id.clone()).or_default().push(e.clone());
    }
    let report = diff(
        &Side {
            policy: &pa.name,
            variants: &va,
            mentions: &ma,
        },
        &Side {
            policy: &pb.name,
            variants: &vb,
            mentions: &mb,
        },
        &events,
    )
    .map_err(|e| ApiError::new(StatusCode::CONFLICT, "lineage_mismatch", e.to_string()))?;
    Ok(Json(json!(report)))
}
